#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "hopfcl/amplitude.hpp"
#include "hopfcl/etdrk4.hpp"
#include "hopfcl/linear_analysis.hpp"
#include "hopfcl/models.hpp"
#include "hopfcl/rd_solver.hpp"

namespace hopfcl {

enum class AnsatzVariable { c1, cm1, us, v };

// delta-exponent of the leading coefficient at harmonic m.
int ansatz_exponent(AnsatzVariable var, int m);

struct AnsatzSpec {
  int theta = 1;
  double omega0 = 1.0;
  double kappa = 1.0;  // eps / delta
  std::vector<int> harmonics() const;
  void validate() const;
};

inline constexpr int kMaxTheta = 3;

// u = delta A(delta x) e^{i w0 t} U + c.c.,  v = delta^2 B(delta x)
RDState first_order_ansatz(const Field& A1, const Field& B0, double delta, double t, double omega0,
                           const Eigen::VectorXcd& U, const SpectralGrid& fast);

struct HarmonicFields {
  Field A10, A12, A1m2;
};

HarmonicFields eliminate_harmonics_toy(const Field& A1, double omega0);

// Expansion of the toy system
//   u_1 = sum_p sum_m delta^p F_{p,m}(X,T) e^{i m w0 t},   v = sum_p sum_m delta^p G_{p,m}(X,T) e^{i m w0 t}
// Evolved fields are F_{p,1} (p <= theta) and G_{p,0} (p <= theta + 1); every
// other coefficient follows from the harmonic balance at its order.
class ToyHierarchy {
 public:
  struct State {
    std::vector<Field> evolved;
    double T = 0.0;
  };

  struct FieldId {
    char kind;
    int p;
    int m;
  };

  ToyHierarchy(const AnsatzSpec& spec, const SpectralGrid& slow);

  const AnsatzSpec& spec() const { return spec_; }
  const SpectralGrid& slow() const { return slow_; }
  const std::vector<FieldId>& evolved_ids() const { return evolved_; }
  std::optional<std::size_t> evolved_index(char kind, int p) const;

  State initial(const Field& A1, const Field& B0) const;
  // Sets F_{2,1} so that the order-delta^2 part of the critical field at fast
  // time t carries no contribution from the harmonics m = 0, +-2.
  void match_initial_harmonics(State& s, double t) const;
  void advance(State& s, int steps, double dT) const;

  // Coefficient fields (slow grid, physical) of order p at harmonic m and the
  // j-th Taylor coefficient in T.
  class Jets {
   public:
    Jets(const ToyHierarchy& h, const std::vector<CVec>& evolved_physical);
    const CVec& F(int p, int m, int j = 0);
    const CVec& G(int p, int m, int j = 0);
    const CVec& N(int p, int m, int j = 0);
    const CVec& Q(int p, int m, int j = 0);
    bool is_zero(char kind, int p, int m, int j);
    Field field(char kind, int p, int m, int j = 0);

   private:
    struct Entry {
      CVec v;
      bool zero = true;
    };
    using Key = std::tuple<char, int, int, int>;
    const Entry& get(char kind, int p, int m, int j);
    Entry compute(char kind, int p, int m, int j);
    Entry H(int p, int m, int j);
    CVec d2(const CVec& f) const;

    const ToyHierarchy& h_;
    std::vector<CVec> evolved_;
    std::map<Key, Entry> memo_;
    Entry zero_;
  };

  Jets jets(const State& s) const;

  // Psi_theta on the fast grid at fast time t; tau shifts the slow state by a
  // Taylor expansion of the flow.
  RDState reconstruct(const State& s, double delta, double t, const SpectralGrid& fast, double tau = 0.0,
                      int taylor_degree = 4) const;

  // Fields of Psi_theta as (kind, p, m) triples.
  std::vector<FieldId> included() const;

 private:
  void evolved_rhs(const std::vector<CVec>& hat, std::vector<CVec>& out) const;

  AnsatzSpec spec_;
  SpectralGrid slow_;
  std::vector<FieldId> evolved_;
  mutable std::map<double, std::shared_ptr<Etdrk4>> engines_;
};

struct ResidualSample {
  double res1 = 0.0;
  double res_s = 0.0;
  double res_v = 0.0;
};

struct ResidualOptions {
  double fd_step = 1e-3;
  int phases = 8;
  double delta_tilde = 0.5;
};

ResidualSample residuals(const RDModel& model, const ToyHierarchy& h, const ToyHierarchy::State& s, double delta,
                         const SpectralGrid& fast, const ResidualOptions& opt = {});

struct ResidualScaling {
  std::vector<double> deltas;
  std::vector<ResidualSample> samples;
  double slope1 = 0.0;
  double slope_s = 0.0;
  double slope_v = 0.0;
};

struct ResidualExperimentConfig {
  double omega0 = 1.0;
  double eps_over_delta = 1.0;
  int theta = 1;
  std::vector<double> deltas{0.2, 0.1, 0.05};
  double T_eval = 0.5;
  double dT = 1e-3;
  int slow_n = 64;
  Field A0, B0;
};

ResidualScaling residual_experiment(const ResidualExperimentConfig& cfg);

struct ExtractedAmplitudes {
  Field A1;
  Field B0;
};

ExtractedAmplitudes extract_amplitudes(const RDState& state, const ModelLinearization& lin, double delta,
                                       double delta_tilde, const Eigen::VectorXcd& U, const SpectralGrid& slow,
                                       double omega0);

// Combined norm of (u, v/delta) in H^{n+1} x H^n.
double scaled_error_norm(const RDState& a, const RDState& b, double delta, int n = 1);
double scaled_state_norm(const RDState& a, double delta, int n = 1);
// Uniformly-local surrogate of the same norm.
double scaled_state_norm_ul(const RDState& a, double delta, int n = 1);

// Grid on the fast scale whose size is a multiple of the slow grid size.
SpectralGrid fast_grid_for(double delta, int slow_n);

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ApproximationConfig {
  double omega0 = 1.0;
  double eps_over_delta = 1.0;
  int theta = 2;
  std::vector<double> deltas{0.2, 0.1, 0.05};
  double T0 = 1.0;
  double dT = 1e-3;
  double dt_fast = 0.02;
  int slow_n = 64;
  int checkpoints = 20;
  int norm_order = 1;
  double ic_perturbation = 0.0;
  std::uint64_t seed = 1;
  Field A0, B0;
};

struct ApproximationCell {
  double delta = 0.0;
  double max_error = 0.0;
  std::vector<double> T;
  std::vector<double> error;
  double amplitude_sup = 0.0;
  double ic_error = 0.0;
};

struct ApproximationReport {
  std::vector<ApproximationCell> cells;
  double slope = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

ApproximationReport approximation_experiment(const ApproximationConfig& cfg);

struct AttractivityConfig {
  double omega0 = 1.0;
  double eps_over_delta = 1.0;
  int theta = 2;
  std::vector<double> deltas{0.2, 0.1, 0.05};
  double T1 = 0.5;
  double R0 = 1.0;
  double k_band = 1.0;
  double delta_tilde = 0.5;
  double dt_fast = 0.02;
  int slow_n = 64;
  std::uint64_t seed = 7;
  bool linear = false;  // drop every nonlinear term of the model
  bool start_on_manifold = false;
  Field A0, B0;
};

struct AttractivityCell {
  double delta = 0.0;
  double t = 0.0;
  double us_ratio = 0.0;
  double esv_ratio = 0.0;
  double dxc_ratio = 0.0;
  double us_initial_ratio = 0.0;
  double manifold_distance = 0.0;
  double manifold_distance_ul = 0.0;
};

struct AttractivityReport {
  std::vector<AttractivityCell> cells;
  double us_spread = 0.0;
  double esv_spread = 0.0;
  double dxc_spread = 0.0;
  bool pass = false;
};

AttractivityReport attractivity_experiment(const AttractivityConfig& cfg);

// Band-limited random field with |k| <= k_band, Hermitian so that it is real.
Field random_band_field(const SpectralGrid& grid, double k_band, std::uint64_t seed);

struct GlobalExistenceConfig {
  double omega0 = 1.0;
  double eps_over_delta = 1.0;
  int theta = 2;
  double delta = 0.1;
  int cycles = 5;
  double T1 = 0.5;
  double T0 = 2.0;
  double R0 = 0.0;  // 0 selects four times the norm of the periodic orbit
  double ic_fraction = 1.0;
  double k_band = 1.0;
  double delta_tilde = 0.5;
  double dt_fast = 0.02;
  int slow_n = 64;
  std::uint64_t seed = 11;
  bool zero_ic = false;
  AmplitudeCoefficients coefficients;
  bool coefficients_override = false;
};

struct GlobalExistenceCycle {
  int index = 0;
  double t_end = 0.0;
  double norm_end = 0.0;
  double norm_max = 0.0;
  double ratio_end = 0.0;
  double approximation_error = 0.0;
};

struct GlobalExistenceReport {
  bool coeff_ok = false;
  double coeff_margin = 0.0;
  double R0 = 0.0;
  double initial_norm = 0.0;
  double attractivity_norm_max = 0.0;
  std::vector<GlobalExistenceCycle> cycles;
  bool escaped = false;
  int escape_cycle = -1;
  bool envelope_non_increasing = false;
  bool pass = false;
  std::string message;
};

GlobalExistenceReport global_existence_experiment(const GlobalExistenceConfig& cfg);

}  // namespace hopfcl
