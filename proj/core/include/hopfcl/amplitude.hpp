#pragma once

#include <utility>

#include "hopfcl/etdrk4.hpp"
#include "hopfcl/spectral.hpp"

namespace hopfcl {

// d_T A = a0 A_XX + a1 A + a2 A B - a3 A |A|^2
// d_T B = b0 B_XX + b1 (|A|^2)_XX
struct AmplitudeCoefficients {
  cplx a0{1.0, 0.0};
  double a1 = 1.0;
  double a2 = 1.0;
  cplx a3{1.0, 0.0};
  double b0 = 1.0;
  double b1 = 1.0;

  void validate() const;
};

struct AmplitudeScales {
  double cA = 1.0;
  double cB = 1.0;
  double cT = 1.0;
  double cX = 1.0;
};

// d_T A = (1 + i gamma0) A_XX + A + beta A B - (1 + i gamma3) A |A|^2
// d_T B = alpha B_XX + (|A|^2)_XX          (forcing absent when b1_zero)
struct NormalizedCoefficients {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma0 = 0.0;
  double gamma3 = 0.0;
  AmplitudeScales scales;
  bool b1_zero = false;

  AmplitudeCoefficients as_raw() const;
};

AmplitudeCoefficients derive_coefficients_toy(double omega0);
NormalizedCoefficients normalize(const AmplitudeCoefficients& c);

struct CoeffCondition {
  double margin = 0.0;
  bool satisfied = false;
};

CoeffCondition coeff_condition(const NormalizedCoefficients& n);

struct AmplitudeState {
  Field A;
  Field B;
  double T = 0.0;
};

struct AmplitudeRhs {
  Field dA;
  Field dB;
};

class AmplitudeSolver {
 public:
  // gain multiplies a1 in the linear term, (eps/delta)^2 in the scaled setting.
  AmplitudeSolver(const AmplitudeCoefficients& c, const SpectralGrid& grid, double dT, double gain = 1.0);

  void step(AmplitudeState& s);
  void advance(AmplitudeState& s, int steps);
  AmplitudeRhs rhs(const AmplitudeState& s) const;

  const AmplitudeCoefficients& coefficients() const { return c_; }
  double dT() const { return engine_.dt(); }
  double gain() const { return gain_; }

 private:
  void nonlinear(const std::vector<CVec>& in, std::vector<CVec>& out) const;

  AmplitudeCoefficients c_;
  double gain_;
  Etdrk4 engine_;
  mutable CVec a_, b_, w_, p_, q_;
  std::vector<CVec> hat_;
};

AmplitudeState step_amplitude(const NormalizedCoefficients& n, const AmplitudeState& s, double dT,
                              double eps_over_delta = 1.0);
AmplitudeState step_amplitude(const AmplitudeCoefficients& c, const AmplitudeState& s, double dT,
                              double eps_over_delta = 1.0);

struct SpecialSolution {
  bool oscillating = false;
  cplx A_hat{0.0, 0.0};
  double omega = 0.0;
  double b = 0.0;
};

SpecialSolution special_periodic_solution(double b, const NormalizedCoefficients& n);

struct MeanSplit {
  double b = 0.0;
  Field B_tilde;
  double shifted_gain = 1.0;
};

MeanSplit split_mean(const Field& B, double beta);

double amplitude_rhs_residual(const AmplitudeState& s, const Field& dA, const Field& dB,
                              const AmplitudeCoefficients& c, double eps_over_delta = 1.0);

// Slow grid of the amplitude system, L = 2 pi by default.
SpectralGrid slow_grid(int n = 64, double length = 2.0 * M_PI);

}  // namespace hopfcl
