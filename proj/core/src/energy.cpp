#include "hopfcl/energy.hpp"

#include "hopfcl/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hopfcl {

namespace {

double zero_mean_tol(const Field& Bh) {
  double s = 0.0;
  for (std::size_t i = 0; i < Bh.size(); ++i) s += std::norm(Bh[i]);
  return 1e-10 * std::max(1.0, std::sqrt(s));
}

// sum_j w_j Re(conj(a_j) b_j) L for Fourier coefficients
template <class W>
double weighted_inner(const Field& ah, const Field& bh, W weight) {
  const SpectralGrid& g = ah.grid();
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    s += weight(g.wavenumber(i)) * (std::conj(ah[idx]) * bh[idx]).real();
  }
  return s * g.length();
}

void require_zero_mean(const Field& Bh, const char* who) {
  if (std::abs(Bh[0]) > zero_mean_tol(Bh)) throw std::invalid_argument(std::string(who) + ": B must have zero mean");
}

}  // namespace

double lyapunov_level0(const Field& A, const Field& B, double q) {
  if (!(A.grid() == B.grid())) throw std::invalid_argument("lyapunov_level0: grid mismatch");
  const Field Ah = A.to_fourier();
  const Field Bh = B.to_fourier();
  require_zero_mean(Bh, "lyapunov_level0");
  const double a = weighted_inner(Ah, Ah, [](double) { return 1.0; });
  const double b = weighted_inner(Bh, Bh, [](double k) { return k == 0.0 ? 0.0 : 1.0 / (k * k); });
  return a + q * b;
}

double lyapunov_level1(const Field& A, const Field& B, double beta) {
  if (!(A.grid() == B.grid())) throw std::invalid_argument("lyapunov_level1: grid mismatch");
  const Field Ah = A.to_fourier();
  const Field Bh = B.to_fourier();
  const double a = weighted_inner(Ah, Ah, [](double k) { return k * k; });
  const double b = weighted_inner(Bh, Bh, [](double) { return 1.0; });
  return a + beta * b;
}

ConditionD condition_d_check(double q, double r, double alpha, double beta, int samples) {
  if (samples < 3) throw std::invalid_argument("condition_d_check: need at least 3 samples");
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("condition_d_check: r must lie in (0, 1]");
  ConditionD out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double t = -M_PI / 2 + M_PI * i / (samples - 1);
    const double s = std::max(0.0, std::cos(t));
    const double B = std::sin(t);
    const double margin = (1.0 - r) * alpha * q * B * B + (1.0 - r) * s * s - (q - beta) * B * s;
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_angle = t;
      out.worst_A2 = s;
      out.worst_B = B;
    }
  }
  out.ok = out.worst_margin >= -1e-12;
  return out;
}

double condition_d_rmax(double q, double alpha, double beta) {
  if (!(alpha > 0.0) || !(q > 0.0)) throw std::invalid_argument("condition_d_rmax: alpha and q must be positive");
  return 1.0 - std::abs(q - beta) / (2.0 * std::sqrt(alpha * q));
}

AbsorbingBound absorbing_bound(double L, double alpha, double beta) {
  if (!(L > 0.0) || !(alpha > 0.0)) throw std::invalid_argument("absorbing_bound: L and alpha must be positive");
  if (!(1.0 + beta / alpha > 0.0))
    throw std::invalid_argument("absorbing_bound: condition 1 + beta/alpha > 0 violated");
  const double P = L * L / (4.0 * M_PI * M_PI * alpha);
  AbsorbingBound b;
  if (beta > 0.0) {
    b.q = beta;
    b.r = 1.0;
    b.C_inf0 = L * std::max(1.0, P);
    return b;
  }
  b.q = 2.0 * alpha + beta;
  double r = 0.5;
  for (int i = 1; i <= kRadiusGridDepth; ++i, r *= 0.5) {
    if (condition_d_check(b.q, r, alpha, beta).ok) {
      b.r = r;
      b.C_inf0 = (L / r) * std::max(1.0, P / r);
      return b;
    }
  }
  throw std::runtime_error("absorbing_bound: no r in {1/2, ..., 2^-10} satisfies the sign condition");
}

double level0_rate(const AmplitudeState& s, const AmplitudeRhs& rhs, double q) {
  const Field Ah = s.A.to_fourier(), dAh = rhs.dA.to_fourier();
  const Field Bh = s.B.to_fourier(), dBh = rhs.dB.to_fourier();
  return 2.0 * weighted_inner(Ah, dAh, [](double) { return 1.0; }) +
         2.0 * q * weighted_inner(Bh, dBh, [](double k) { return k == 0.0 ? 0.0 : 1.0 / (k * k); });
}

double level1_rate(const AmplitudeState& s, const AmplitudeRhs& rhs, double beta) {
  const Field Ah = s.A.to_fourier(), dAh = rhs.dA.to_fourier();
  const Field Bh = s.B.to_fourier(), dBh = rhs.dB.to_fourier();
  return 2.0 * weighted_inner(Ah, dAh, [](double k) { return k * k; }) +
         2.0 * beta * weighted_inner(Bh, dBh, [](double) { return 1.0; });
}

double level0_majorant(const AmplitudeState& s, double alpha, const AbsorbingBound& bound) {
  const Field Ah = s.A.to_fourier();
  const Field Bh = s.B.to_fourier();
  const double L = s.A.grid().length();
  const double a = weighted_inner(Ah, Ah, [](double) { return 1.0; });
  const double b = weighted_inner(Bh, Bh, [](double k) { return k == 0.0 ? 0.0 : 1.0 / (k * k); });
  const double r = bound.r;
  return 2.0 * (L / r - a - r * 4.0 * M_PI * M_PI / (L * L) * alpha * bound.q * b);
}

namespace {

class EnergyAccumulator {
 public:
  EnergyAccumulator(const NormalizedCoefficients& n, const SpectralGrid& g, double inflation)
      : n_(n), raw_(n.as_raw()), solver_(raw_, g, 1.0) {
    report_.bound = absorbing_bound(g.length(), n.alpha, n.beta);
    report_.inflation = inflation;
    report_.worst_majorant_margin = std::numeric_limits<double>::infinity();
  }

  void add(const AmplitudeState& s) {
    require_zero_mean(s.B.to_fourier(), "dissipation_check");
    const AmplitudeRhs rhs = solver_.rhs(s);
    const double q = report_.bound.q;
    const double E0 = lyapunov_level0(s.A, s.B, q);
    const double E1 = lyapunov_level1(s.A, s.B, n_.beta);
    const double rate = level0_rate(s, rhs, q);
    const double maj = level0_majorant(s, n_.alpha, report_.bound);
    report_.T.push_back(s.T);
    report_.E0.push_back(E0);
    report_.E1.push_back(E1);
    report_.rate.push_back(rate);
    report_.majorant.push_back(maj);
    rate1_.push_back(level1_rate(s, rhs, n_.beta));
    report_.worst_majorant_margin = std::min(report_.worst_majorant_margin, maj - rate);
    if (rate > maj + kMajorantTol) {
      report_.majorant_ok = false;
      report_.violations.push_back({"majorant", s.T, rate, maj});
    }
  }

  EnergyReport finish() {
    auto& r = report_;
    const double limit = r.inflation * r.bound.C_inf0;
    // Entry: first checkpoint after which E0 stays within the inflated ball.
    std::size_t last_out = r.E0.size();
    for (std::size_t i = 0; i < r.E0.size(); ++i)
      if (r.E0[i] > limit) last_out = i;
    const bool ever_inside = !r.E0.empty() && r.E0.back() <= limit;
    if (ever_inside) {
      const std::size_t entry = last_out == r.E0.size() ? 0 : last_out + 1;
      std::size_t first_in = r.E0.size();
      for (std::size_t i = 0; i < r.E0.size(); ++i)
        if (r.E0[i] <= limit) {
          first_in = i;
          break;
        }
      r.entry_time = r.T[first_in];
      if (entry != first_in) {
        r.ball_ok = false;
        r.violations.push_back({"ball_reexit", r.T[last_out], r.E0[last_out], limit});
      }
      double tail = 0.0;
      for (std::size_t i = entry; i < r.E0.size(); ++i) tail = std::max(tail, r.E0[i]);
      r.asymptotic_radius = tail;
    } else {
      r.ball_ok = false;
      if (!r.E0.empty()) r.violations.push_back({"ball_not_entered", r.T.back(), r.E0.back(), limit});
    }
    // Level-1 weight: smallest power of two making d/dT (E1 + gamma E0) <= 0 outside the level-0 ball.
    r.gamma_found = false;
    for (double g = 1.0; g <= 1048576.0; g *= 2.0) {
      bool good = true;
      for (std::size_t i = 0; i < r.E0.size() && good; ++i)
        if (r.E0[i] > r.bound.C_inf0 && rate1_[i] + g * r.rate[i] > 0.0) good = false;
      if (good) {
        r.gamma = g;
        r.gamma_found = true;
        break;
      }
    }
    return r;
  }

 private:
  NormalizedCoefficients n_;
  AmplitudeCoefficients raw_;
  AmplitudeSolver solver_;
  EnergyReport report_;
  std::vector<double> rate1_;
};

}  // namespace

EnergyReport dissipation_check(const std::vector<AmplitudeState>& trajectory, const NormalizedCoefficients& n,
                               double inflation) {
  if (trajectory.empty()) throw std::invalid_argument("dissipation_check: empty trajectory");
  EnergyAccumulator acc(n, trajectory.front().A.grid(), inflation);
  for (const auto& s : trajectory) acc.add(s);
  return acc.finish();
}

EnergyReport energy_run(const NormalizedCoefficients& n, const AmplitudeState& initial, const EnergyRunConfig& cfg) {
  if (!(cfg.dT > 0.0) || !(cfg.checkpoint >= cfg.dT) || !(cfg.T_end > 0.0))
    throw std::invalid_argument("energy_run: invalid time stepping");
  const int per = static_cast<int>(std::lround(cfg.checkpoint / cfg.dT));
  const int checkpoints = static_cast<int>(std::lround(cfg.T_end / cfg.checkpoint));
  const SpectralGrid& g = initial.A.grid();
  EnergyAccumulator acc(n, g, cfg.inflation);
  AmplitudeSolver solver(n.as_raw(), g, cfg.dT);
  AmplitudeState s = initial;
  acc.add(s);
  for (int c = 0; c < checkpoints; ++c) {
    solver.advance(s, per);
    acc.add(s);
  }
  return acc.finish();
}

AmplitudeState random_amplitude_state(const SpectralGrid& grid, double E0, double q, std::uint64_t seed,
                                      double k_band) {
  if (!(E0 > 0.0) || !(q > 0.0)) throw std::invalid_argument("random_amplitude_state: E0 and q must be positive");
  const Field re = random_band_field(grid, k_band, seed);
  const Field im = random_band_field(grid, k_band, seed + 1);
  Field A = re + cplx(0.0, 1.0) * im;
  Field B = random_band_field(grid, k_band, seed + 2);
  const double m = mean(B);
  for (std::size_t i = 0; i < B.size(); ++i) B[i] -= m;
  const double e = lyapunov_level0(A, B, q);
  if (!(e > 0.0)) throw std::runtime_error("random_amplitude_state: degenerate draw");
  const double s = std::sqrt(E0 / e);
  A *= s;
  B *= s;
  return {std::move(A), std::move(B), 0.0};
}

}  // namespace hopfcl
