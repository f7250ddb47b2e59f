#include "hopfcl/amplitude.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hopfcl {

void AmplitudeCoefficients::validate() const {
  if (!(a0.real() > 0.0)) throw std::invalid_argument("amplitude coefficients: Re a0 must be positive");
  if (!(b0 > 0.0)) throw std::invalid_argument("amplitude coefficients: b0 must be positive");
  if (!(a1 > 0.0)) throw std::invalid_argument("amplitude coefficients: a1 must be positive");
  if (!(a3.real() > 0.0)) throw std::invalid_argument("amplitude coefficients: Re a3 must be positive");
}

AmplitudeCoefficients NormalizedCoefficients::as_raw() const {
  AmplitudeCoefficients c;
  c.a0 = cplx(1.0, gamma0);
  c.a1 = 1.0;
  c.a2 = beta;
  c.a3 = cplx(1.0, gamma3);
  c.b0 = alpha;
  c.b1 = b1_zero ? 0.0 : 1.0;
  return c;
}

AmplitudeCoefficients derive_coefficients_toy(double omega0) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("derive_coefficients_toy: omega0 must be positive");
  AmplitudeCoefficients c;
  c.a0 = 1.0;
  c.a1 = 1.0;
  c.a2 = 1.0;
  c.a3 = cplx(1.0, 2.0 / (3.0 * omega0));
  c.b0 = 1.0;
  c.b1 = 1.0;
  return c;
}

NormalizedCoefficients normalize(const AmplitudeCoefficients& c) {
  c.validate();
  NormalizedCoefficients n;
  auto& s = n.scales;
  s.cT = 1.0 / c.a1;
  s.cA = std::sqrt(1.0 / (s.cT * c.a3.real()));
  s.cX = std::sqrt(s.cT * c.a0.real());
  n.b1_zero = c.b1 == 0.0;
  s.cB = n.b1_zero ? 1.0 : s.cT * c.b1 * s.cA * s.cA / (s.cX * s.cX);
  n.alpha = s.cT * c.b0 / (s.cX * s.cX);
  n.beta = s.cT * c.a2 * s.cB;
  n.gamma0 = (s.cT * c.a0 / (s.cX * s.cX)).imag();
  n.gamma3 = (s.cT * c.a3 * s.cA * s.cA).imag();
  return n;
}

CoeffCondition coeff_condition(const NormalizedCoefficients& n) {
  CoeffCondition r;
  r.margin = 1.0 + n.beta / n.alpha;
  r.satisfied = r.margin > 0.0;
  return r;
}

AmplitudeSolver::AmplitudeSolver(const AmplitudeCoefficients& c, const SpectralGrid& grid, double dT, double gain)
    : c_(c),
      gain_(gain),
      engine_(grid, 2,
              [c, gain](double k) {
                Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(2, 2);
                L(0, 0) = -c.a0 * k * k + gain * c.a1;
                L(1, 1) = -c.b0 * k * k;
                return L;
              },
              dT) {
  const auto n = static_cast<std::size_t>(grid.size());
  a_.assign(n, 0.0);
  b_.assign(n, 0.0);
  w_.assign(n, 0.0);
  p_.assign(n, 0.0);
  q_.assign(n, 0.0);
}

void AmplitudeSolver::nonlinear(const std::vector<CVec>& in, std::vector<CVec>& out) const {
  const SpectralGrid& g = engine_.grid();
  const auto n = static_cast<std::size_t>(g.size());
  w_ = in[0];
  dealias(w_);
  fft_inverse(w_, a_);
  w_ = in[1];
  dealias(w_);
  fft_inverse(w_, b_);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx A = a_[i];
    const double B = b_[i].real();
    const double m = std::norm(A);
    p_[i] = c_.a2 * A * B - c_.a3 * A * m;
    q_[i] = c_.b1 * m;
  }
  fft_forward(p_, out[0]);
  dealias(out[0]);
  fft_forward(q_, out[1]);
  dealias(out[1]);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.wavenumber(static_cast<int>(i));
    out[1][i] *= -k * k;
  }
}

void AmplitudeSolver::advance(AmplitudeState& s, int steps) {
  if (!(s.A.grid() == engine_.grid()) || !(s.B.grid() == engine_.grid()))
    throw std::invalid_argument("AmplitudeSolver: grid mismatch");
  if (steps <= 0) return;
  const Field Ah = s.A.to_fourier();
  const Field Bh = s.B.to_fourier();
  hat_ = {CVec(Ah.values().begin(), Ah.values().end()), CVec(Bh.values().begin(), Bh.values().end())};
  const auto nl = [this](const std::vector<CVec>& in, std::vector<CVec>& out) { nonlinear(in, out); };
  for (int i = 0; i < steps; ++i) {
    engine_.step(hat_, nl);
    for (const auto& c : hat_)
      for (const auto& z : c)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
          throw std::runtime_error("AmplitudeSolver: non-finite state at T = " +
                                   std::to_string(s.T + (i + 1) * engine_.dt()));
  }
  s.A = Field(engine_.grid(), hat_[0], Space::fourier).to_physical();
  s.B = Field(engine_.grid(), hat_[1], Space::fourier).to_physical().real_part();
  s.T += steps * engine_.dt();
}

void AmplitudeSolver::step(AmplitudeState& s) { advance(s, 1); }

AmplitudeRhs AmplitudeSolver::rhs(const AmplitudeState& s) const {
  const SpectralGrid& g = engine_.grid();
  const auto n = static_cast<std::size_t>(g.size());
  const Field Ah = s.A.to_fourier();
  const Field Bh = s.B.to_fourier();
  std::vector<CVec> in{CVec(Ah.values().begin(), Ah.values().end()), CVec(Bh.values().begin(), Bh.values().end())};
  std::vector<CVec> out(2, CVec(n));
  nonlinear(in, out);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.wavenumber(static_cast<int>(i));
    out[0][i] += (-c_.a0 * k * k + gain_ * c_.a1) * in[0][i];
    out[1][i] += -c_.b0 * k * k * in[1][i];
  }
  return {Field(g, out[0], Space::fourier).to_physical(), Field(g, out[1], Space::fourier).to_physical()};
}

AmplitudeState step_amplitude(const AmplitudeCoefficients& c, const AmplitudeState& s, double dT,
                              double eps_over_delta) {
  AmplitudeSolver solver(c, s.A.grid(), dT, eps_over_delta * eps_over_delta);
  AmplitudeState out = s;
  solver.step(out);
  return out;
}

AmplitudeState step_amplitude(const NormalizedCoefficients& n, const AmplitudeState& s, double dT,
                              double eps_over_delta) {
  return step_amplitude(n.as_raw(), s, dT, eps_over_delta);
}

SpecialSolution special_periodic_solution(double b, const NormalizedCoefficients& n) {
  SpecialSolution s;
  s.b = b;
  const double amp2 = 1.0 + n.beta * b;
  if (amp2 > 0.0) {
    s.oscillating = true;
    s.A_hat = std::sqrt(amp2);
    s.omega = -amp2 * n.gamma3;
  }
  return s;
}

MeanSplit split_mean(const Field& B, double beta) {
  MeanSplit m;
  Field Bh = B.to_fourier();
  m.b = Bh[0].real();
  Bh[0] = 0.0;
  m.B_tilde = B.space() == Space::fourier ? Bh : Bh.to_physical();
  m.shifted_gain = 1.0 + beta * m.b;
  return m;
}

double amplitude_rhs_residual(const AmplitudeState& s, const Field& dA, const Field& dB,
                              const AmplitudeCoefficients& c, double eps_over_delta) {
  AmplitudeSolver solver(c, s.A.grid(), 1.0, eps_over_delta * eps_over_delta);
  const AmplitudeRhs r = solver.rhs(s);
  return std::max(sup_norm(dA - r.dA), sup_norm(dB - r.dB));
}

SpectralGrid slow_grid(int n, double length) { return make_grid(n, length); }

}  // namespace hopfcl
