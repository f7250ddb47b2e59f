#include "hopfcl/etdrk4.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>

namespace hopfcl {

std::array<Eigen::MatrixXcd, 4> phi_functions(const Eigen::MatrixXcd& M) {
  const Eigen::Index m = M.rows();
  Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(4 * m, 4 * m);
  Z.block(0, 0, m, m) = M;
  for (int b = 0; b < 3; ++b) Z.block(b * m, (b + 1) * m, m, m).setIdentity();
  const Eigen::MatrixXcd X = Z.exp();
  return {X.block(0, 0, m, m), X.block(0, m, m, m), X.block(0, 2 * m, m, m),
          X.block(0, 3 * m, m, m)};
}

Etdrk4::Etdrk4(const SpectralGrid& grid, int components, const MatrixSymbol& symbol, double dt)
    : grid_(grid), m_(components), dt_(dt) {
  if (components < 1) throw std::invalid_argument("Etdrk4: need at least one component");
  if (!(dt > 0.0)) throw std::invalid_argument("Etdrk4: dt must be positive");
  const int n = grid.size();
  const auto mm = static_cast<Eigen::Index>(m_);

  std::vector<Eigen::MatrixXcd> symbols(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    symbols[static_cast<std::size_t>(i)] = symbol(grid.wavenumber(i));
    const auto& L = symbols[static_cast<std::size_t>(i)];
    if (L.rows() != mm || L.cols() != mm)
      throw std::invalid_argument("Etdrk4: symbol has wrong shape");
    for (Eigen::Index r = 0; r < mm; ++r)
      for (Eigen::Index c = 0; c < mm; ++c)
        if (r != c && L(r, c) != cplx(0.0)) diagonal_ = false;
  }

  block_ = diagonal_ ? static_cast<std::size_t>(m_) : static_cast<std::size_t>(m_ * m_);
  coeffs_.assign(static_cast<std::size_t>(n) * kSlots * block_, cplx(0.0));

  auto store = [&](std::size_t i, Slot slot, const Eigen::MatrixXcd& C) {
    cplx* dst = coeffs_.data() + (i * kSlots + slot) * block_;
    if (diagonal_) {
      for (int r = 0; r < m_; ++r) dst[r] = C(r, r);
    } else {
      for (int r = 0; r < m_; ++r)
        for (int c = 0; c < m_; ++c) dst[r * m_ + c] = C(r, c);
    }
  };

  for (int i = 0; i < n; ++i) {
    const auto& L = symbols[static_cast<std::size_t>(i)];
    std::array<Eigen::MatrixXcd, 4> full, half;
    if (diagonal_) {
      for (auto& M : full) M = Eigen::MatrixXcd::Zero(mm, mm);
      for (auto& M : half) M = Eigen::MatrixXcd::Zero(mm, mm);
      for (Eigen::Index r = 0; r < mm; ++r) {
        Eigen::MatrixXcd z(1, 1);
        z(0, 0) = L(r, r) * dt;
        const auto pf = phi_functions(z);
        z(0, 0) = L(r, r) * (0.5 * dt);
        const auto ph = phi_functions(z);
        for (int q = 0; q < 4; ++q) {
          full[static_cast<std::size_t>(q)](r, r) = pf[static_cast<std::size_t>(q)](0, 0);
          half[static_cast<std::size_t>(q)](r, r) = ph[static_cast<std::size_t>(q)](0, 0);
        }
      }
    } else {
      full = phi_functions(L * dt);
      half = phi_functions(L * (0.5 * dt));
    }
    const auto idx = static_cast<std::size_t>(i);
    store(idx, kE, full[0]);
    store(idx, kE2, half[0]);
    store(idx, kQ, (0.5 * dt) * half[1]);
    store(idx, kF1, dt * (full[1] - 3.0 * full[2] + 4.0 * full[3]));
    store(idx, kF2, (2.0 * dt) * (full[2] - 2.0 * full[3]));
    store(idx, kF3, dt * (4.0 * full[3] - full[2]));
  }

  const State zero(static_cast<std::size_t>(m_), CVec(static_cast<std::size_t>(n)));
  nu_ = na_ = nb_ = nc_ = a_ = b_ = c_ = tmp_ = zero;
}

const cplx* Etdrk4::coeff(Slot slot, std::size_t i) const {
  return coeffs_.data() + (i * kSlots + slot) * block_;
}

void Etdrk4::apply(Slot slot, const State& x, State& y, bool accumulate) const {
  const auto n = static_cast<std::size_t>(grid_.size());
  const auto m = static_cast<std::size_t>(m_);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx* C = coeff(slot, i);
    for (std::size_t r = 0; r < m; ++r) {
      cplx acc = 0.0;
      if (diagonal_) {
        acc = C[r] * x[r][i];
      } else {
        for (std::size_t c = 0; c < m; ++c) acc += C[r * m + c] * x[c][i];
      }
      if (accumulate)
        y[r][i] += acc;
      else
        y[r][i] = acc;
    }
  }
}

void Etdrk4::step(State& u, const Nonlinear& N) {
  if (u.size() != static_cast<std::size_t>(m_)) throw std::invalid_argument("Etdrk4: state size");
  const auto m = static_cast<std::size_t>(m_);
  const auto n = static_cast<std::size_t>(grid_.size());

  N(u, nu_);
  apply(kE2, u, a_, false);
  apply(kQ, nu_, a_, true);

  N(a_, na_);
  apply(kE2, u, b_, false);
  apply(kQ, na_, b_, true);

  N(b_, nb_);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t i = 0; i < n; ++i) tmp_[r][i] = 2.0 * nb_[r][i] - nu_[r][i];
  apply(kE2, a_, c_, false);
  apply(kQ, tmp_, c_, true);

  N(c_, nc_);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t i = 0; i < n; ++i) tmp_[r][i] = na_[r][i] + nb_[r][i];

  apply(kE, u, a_, false);
  apply(kF1, nu_, a_, true);
  apply(kF2, tmp_, a_, true);
  apply(kF3, nc_, a_, true);
  std::swap(u, a_);
}

}  // namespace hopfcl
