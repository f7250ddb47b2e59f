#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hopfcl/spectral.hpp"

namespace hopfcl {

struct ModelLinearization {
  int d = 2;
  std::vector<double> diffusion;
  double d_v = 1.0;
  Eigen::MatrixXcd jacobian;
  double parameter = 0.0;

  Eigen::MatrixXcd symbol(double k) const;
  void validate() const;
};

// Curves are indexed j = 0 (conservation law) and j = 1..d (u-block), where
// j = 1 carries the critical eigenvalue with positive frequency and j = 2 its
// partner, i.e. lambda_{-1} of the text.
struct DispersionData {
  std::vector<double> k_samples;
  std::vector<std::vector<cplx>> curves;
  std::vector<std::vector<Eigen::VectorXcd>> eigenvectors;
  std::vector<bool> defective;
  std::vector<std::size_t> continuation_failures;
  double min_overlap = 1.0;
  double parameter = 0.0;
  int d = 0;
};

DispersionData dispersion_curves(const ModelLinearization& lin, const std::vector<double>& k_samples);

// Uniform samples on [-k_max, k_max] including k = 0.
std::vector<double> symmetric_samples(double k_max, int half_count);

struct SpecReport {
  double omega0 = 0.0;
  double re_lambda_at_0 = 0.0;
  double slope_at_0 = 0.0;
  double curvature_at_0 = 0.0;
  double other_max_re = 0.0;
  double parameter_derivative = 0.0;
  bool critical = false;
  bool flat = false;
  bool concave = false;
  bool oscillatory = false;
  bool others_stable = false;
  bool transversal = false;
  bool all() const { return critical && flat && concave && oscillatory && others_stable && transversal; }
};

inline constexpr double kCriticalityTol = 1e-8;
inline constexpr double kSlopeTol = 1e-6;
inline constexpr double kCurvatureTol = 1e-6;

SpecReport check_spec(const DispersionData& data, const std::vector<DispersionData>& parameter_sweep);

struct CriticalProjections {
  Eigen::MatrixXcd P1, Pm1;
  Eigen::RowVectorXcd p1, pm1;
  Eigen::VectorXcd U1, Um1;
  cplx lambda1, lambdam1;
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXcd eigenvalues;
  std::size_t i1 = 0, im1 = 0;
  double separation = 0.0;
};

inline constexpr double kSeparationTol = 1e-6;

// Critical eigenvector at k = 0 with the first non-negligible component real
// and positive.
Eigen::VectorXcd critical_eigenvector(const ModelLinearization& lin);
double critical_frequency(const ModelLinearization& lin);

CriticalProjections spectral_projections(const ModelLinearization& lin, double k);

struct ModeSplit {
  Field c1, cm1;
  std::vector<Field> us;
};

ModeSplit mode_split(const std::vector<Field>& u, const ModelLinearization& lin, double delta_tilde);

// Recombine c_{+-1} U_{+-1}(k) + u_s.
std::vector<Field> mode_combine(const ModeSplit& split, const ModelLinearization& lin);

double projection_radius(const ModelLinearization& lin, double k_max = 4.0, double dk = 1e-3);

struct ResonanceReport {
  double margin = 0.0;
  double k_at = 0.0;
  double m_at = 0.0;
  std::array<int, 3> triple{1, 1, 1};
};

ResonanceReport nonresonance_margin(const ModelLinearization& lin, double radius, int samples = 41);

struct DecayFit {
  std::string branch;
  double C = 0.0;
  double sigma = 0.0;
  double growth = 0.0;
  std::vector<double> t;
  std::vector<double> sup_values;
};

struct DecayReport {
  DecayFit critical;
  std::optional<DecayFit> stable;
  DecayFit conservation;
};

// sup_k |e^{lambda(k) t}| (1+k^2)^{r/2} over the given curve samples.
double weighted_symbol_sup(const std::vector<double>& k, const std::vector<cplx>& lambda, double t,
                           double r, double k_min_abs = 0.0);

DecayReport semigroup_decay_check(const DispersionData& data, double s, double r,
                                  const std::vector<double>& t_samples, double delta_tilde = 0.5);

void write_dispersion_csv(std::ostream& os, const DispersionData& data);

}  // namespace hopfcl
