#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hopfcl/amplitude.hpp"

namespace hopfcl {

// int |A|^2 + q |d_X^{-1} B|^2 dX, B zero-mean.
double lyapunov_level0(const Field& A, const Field& B, double q);
// int |d_X A|^2 + beta |B|^2 dX
double lyapunov_level1(const Field& A, const Field& B, double beta);

struct ConditionD {
  bool ok = false;
  double worst_margin = 0.0;
  double worst_angle = 0.0;
  double worst_A2 = 0.0;
  double worst_B = 0.0;
};

// (q - beta) B |A|^2 <= (1 - r) alpha q B^2 + (1 - r) |A|^4, swept over the
// half-circle of directions (|A|^2, B) = (cos t, sin t), t in [-pi/2, pi/2].
ConditionD condition_d_check(double q, double r, double alpha, double beta, int samples = 4001);

// Largest r for which the inequality holds (closed form of the sweep).
double condition_d_rmax(double q, double alpha, double beta);

struct AbsorbingBound {
  double C_inf0 = 0.0;
  double q = 0.0;
  double r = 1.0;
};

inline constexpr int kRadiusGridDepth = 10;

AbsorbingBound absorbing_bound(double L, double alpha, double beta);

// Exact time derivative of the level-0 functional along the normalized flow.
double level0_rate(const AmplitudeState& s, const AmplitudeRhs& rhs, double q);
double level1_rate(const AmplitudeState& s, const AmplitudeRhs& rhs, double beta);
// 2 (L / r - int |A|^2 - r (2 pi)^2 L^{-2} alpha q int |d_X^{-1} B|^2)
double level0_majorant(const AmplitudeState& s, double alpha, const AbsorbingBound& bound);

struct EnergyViolation {
  std::string kind;
  double T = 0.0;
  double value = 0.0;
  double limit = 0.0;
};

struct EnergyReport {
  std::vector<double> T;
  std::vector<double> E0;
  std::vector<double> E1;
  std::vector<double> rate;
  std::vector<double> majorant;
  AbsorbingBound bound;
  double inflation = 1.05;
  std::optional<double> entry_time;
  double asymptotic_radius = 0.0;
  double worst_majorant_margin = 0.0;
  double gamma = 1.0;
  bool gamma_found = false;
  std::vector<EnergyViolation> violations;
  bool majorant_ok = true;
  bool ball_ok = true;

  bool ok() const { return majorant_ok && ball_ok && entry_time.has_value(); }
};

inline constexpr double kMajorantTol = 1e-6;

// Energy diagnostics of a stored trajectory of the normalized system.
EnergyReport dissipation_check(const std::vector<AmplitudeState>& trajectory, const NormalizedCoefficients& n,
                               double inflation = 1.05);

struct EnergyRunConfig {
  double T_end = 100.0;
  double dT = 1e-3;
  double checkpoint = 0.1;
  double inflation = 1.05;
};

// Integrates the normalized system and evaluates the diagnostics at every
// checkpoint without storing the trajectory.
EnergyReport energy_run(const NormalizedCoefficients& n, const AmplitudeState& initial, const EnergyRunConfig& cfg);

// Band-limited random A (complex) and zero-mean B, scaled so that the level-0
// functional with weight q equals E0.
AmplitudeState random_amplitude_state(const SpectralGrid& grid, double E0, double q, std::uint64_t seed,
                                      double k_band = 4.0);

}  // namespace hopfcl
