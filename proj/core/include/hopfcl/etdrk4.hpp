#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hopfcl/spectral.hpp"

namespace hopfcl {

// e^M, phi_1(M), phi_2(M), phi_3(M) from one exponential of a block-augmented matrix.
std::array<Eigen::MatrixXcd, 4> phi_functions(const Eigen::MatrixXcd& M);

// Fourth-order exponential time differencing (Cox-Matthews) for
//   d/dt u_hat(k) = L(k) u_hat(k) + N(u)_hat(k)
// with an m x m linear symbol per wavenumber. State and nonlinearity are
// handled entirely in Fourier space; the caller's N decides how to transform.
class Etdrk4 {
 public:
  using MatrixSymbol = std::function<Eigen::MatrixXcd(double k)>;
  using State = std::vector<CVec>;
  using Nonlinear = std::function<void(const State& in, State& out)>;

  Etdrk4(const SpectralGrid& grid, int components, const MatrixSymbol& symbol, double dt);

  void step(State& state, const Nonlinear& nonlinear);

  double dt() const { return dt_; }
  int components() const { return m_; }
  const SpectralGrid& grid() const { return grid_; }
  bool diagonal() const { return diagonal_; }

 private:
  enum Slot { kE = 0, kE2, kQ, kF1, kF2, kF3, kSlots };

  void apply(Slot slot, const State& x, State& y, bool accumulate) const;
  const cplx* coeff(Slot slot, std::size_t i) const;

  SpectralGrid grid_;
  int m_;
  double dt_;
  bool diagonal_ = true;
  std::size_t block_ = 0;
  std::vector<cplx> coeffs_;
  State nu_, na_, nb_, nc_, a_, b_, c_, tmp_;
};

}  // namespace hopfcl
