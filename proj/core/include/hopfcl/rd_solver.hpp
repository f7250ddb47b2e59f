#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hopfcl/etdrk4.hpp"
#include "hopfcl/models.hpp"

namespace hopfcl {

struct RDState {
  std::vector<Field> u;
  Field v;
  double t = 0.0;
  double initial_mass = 0.0;

  static RDState make(std::vector<Field> u, Field v, double t = 0.0);
  static RDState zeros(const RDModel& model, const SpectralGrid& grid);
  const SpectralGrid& grid() const { return v.grid(); }
};

double conserved_mass(const RDState& state);

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, RDState last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const RDState& last_good() const { return last_good_; }

 private:
  RDState last_good_;
};

// Persistent integrator for one (model, grid, dt); the linear symbol and the
// ETDRK4 coefficients are built once.
class RDSolver {
 public:
  RDSolver(const RDModel& model, const SpectralGrid& grid, double dt);

  void step(RDState& state);
  void advance(RDState& state, int steps);

  const RDModel& model() const { return model_; }
  double dt() const { return engine_.dt(); }
  const SpectralGrid& grid() const { return engine_.grid(); }
  double last_imag_residue() const { return imag_residue_; }

  // Fourier-space right-hand side, for diagnostics.
  void rhs_hat(const std::vector<CVec>& state_hat, std::vector<CVec>& out) const;

 private:
  void nonlinear(const std::vector<CVec>& in, std::vector<CVec>& out) const;

  RDModel model_;
  std::vector<Polynomial> f_nl_;
  Etdrk4 engine_;
  mutable std::vector<CVec> phys_;
  mutable std::vector<CVec> fval_;
  mutable CVec work_;
  double imag_residue_ = 0.0;
  std::vector<CVec> state_hat_;
};

RDState step(const RDModel& model, const RDState& state, double dt);

struct Observer {
  std::string name;
  std::function<double(const RDState&)> fn;
};

struct Trajectory {
  std::vector<double> t;
  std::map<std::string, std::vector<double>> series;
  RDState final_state;
  int stride = 1;
  int steps = 0;
};

Trajectory integrate(const RDModel& model, const RDState& state, double t_end, double dt,
                     const std::vector<Observer>& observers = {}, int stride = 1,
                     std::size_t max_samples = 10000);

// Heuristic ceiling 0.4 / |lambda| of the explicit nonlinear scale.
double dt_heuristic(const RDModel& model, const RDState& state);

// n = max(128, ceil(24/delta)) rounded up to even, length 2 pi / delta.
SpectralGrid fast_grid(double delta);

struct NormalFormKernels {
  cplx b11, b1m1, bm1m1;
};

NormalFormKernels normal_form_kernels(double omega0, double n11 = 1.0, double n1m1 = 1.0, double nm1m1 = 1.0);

enum class Direction { forward, inverse };

RDState normal_form_toy(const RDState& state, double omega0, Direction direction);

}  // namespace hopfcl
