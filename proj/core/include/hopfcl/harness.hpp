#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hopfcl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExitCode : int {
  ok = 0,
  config_error = 2,
  assertion_failed = 3,
  runtime_failure = 4,
};

struct ExperimentConfig {
  std::string subcommand;
  std::string model = "toy";
  std::string model_file;

  double omega0 = 1.0;
  double eps = 0.05;
  double eps_over_delta = 1.0;
  double a = 1.0;
  double b_tilde = 2.05;
  double d1 = 1.0;
  double d2 = 1.0;
  double d_v = 1.0;

  int fast_n = 256;
  double length = 0.0;  // 0 selects 2 pi / delta for the first delta
  int slow_n = 64;
  double slow_length = 6.283185307179586;
  double k_max = 3.0;
  int k_samples = 3000;  // per side of k = 0

  std::vector<double> deltas{0.2, 0.1, 0.05};
  int theta = 1;
  double T0 = 1.0;
  double T1 = 0.5;
  double T_eval = 0.5;
  double T_end = 10.0;
  double dt = 0.0;  // 0 selects the model heuristic
  double dT = 1e-3;
  int stride = 10;
  int checkpoints = 20;
  double checkpoint = 0.1;

  double amplitude = 0.1;
  double k_band = 1.0;
  double R0 = 0.0;  // 0 keeps the experiment default
  int cycles = 5;
  int ics = 10;
  double E0_min = 4.0;
  double E0_max = 25.0;
  double inflation = 1.05;
  bool use_toy_coefficients = true;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma0 = 0.0;
  double gamma3 = 0.0;

  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "hopfcl-out";

  std::string sweep_parameter;
  std::vector<std::string> sweep_values;

  void validate() const;
  // Stable key = value rendering used for hashing and the manifest.
  std::string canonical() const;
  void set(const std::string& key, const std::string& value);
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

std::string csv_field(const std::string& s);
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);
std::string format_number(double x);

struct RunResult {
  ExitCode code = ExitCode::ok;
  std::string message;
  std::vector<std::string> files;
  std::string report_json;
};

const std::vector<std::string>& subcommands();

RunResult run(const ExperimentConfig& cfg);
RunResult sweep(const ExperimentConfig& cfg, const std::string& parameter, const std::vector<std::string>& values);

}  // namespace hopfcl
