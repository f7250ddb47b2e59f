#include "hopfcl/harness.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hopfcl/amplitude.hpp"
#include "hopfcl/approximation.hpp"
#include "hopfcl/energy.hpp"
#include "hopfcl/linear_analysis.hpp"
#include "hopfcl/models.hpp"
#include "hopfcl/rd_solver.hpp"

namespace hopfcl {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(x)) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::string join_numbers(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_number(xs[i]);
  return s;
}

struct Key {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

template <class T>
Key number_key(T ExperimentConfig::*field) {
  return {[field](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return format_number(c.*field);
            else
              return std::to_string(c.*field);
          },
          [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.*field = to_double(k, v);
            } else if constexpr (std::is_unsigned_v<T>) {
              const long long x = to_integer(k, v);
              if (x < 0) throw ConfigError("config: '" + k + "' must be non-negative");
              c.*field = static_cast<T>(x);
            } else {
              c.*field = static_cast<T>(to_integer(k, v));
            }
          }};
}

Key string_key(std::string ExperimentConfig::*field) {
  return {[field](const ExperimentConfig& c) { return c.*field; },
          [field](ExperimentConfig& c, const std::string&, const std::string& v) { c.*field = v; }};
}

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = [] {
    std::map<std::string, Key> t;
    t["subcommand"] = string_key(&ExperimentConfig::subcommand);
    t["model"] = string_key(&ExperimentConfig::model);
    t["model_file"] = string_key(&ExperimentConfig::model_file);
    t["out_dir"] = string_key(&ExperimentConfig::out_dir);
    t["omega0"] = number_key(&ExperimentConfig::omega0);
    t["eps"] = number_key(&ExperimentConfig::eps);
    t["eps_over_delta"] = number_key(&ExperimentConfig::eps_over_delta);
    t["a"] = number_key(&ExperimentConfig::a);
    t["b_tilde"] = number_key(&ExperimentConfig::b_tilde);
    t["d1"] = number_key(&ExperimentConfig::d1);
    t["d2"] = number_key(&ExperimentConfig::d2);
    t["d_v"] = number_key(&ExperimentConfig::d_v);
    t["fast_n"] = number_key(&ExperimentConfig::fast_n);
    t["length"] = number_key(&ExperimentConfig::length);
    t["slow_n"] = number_key(&ExperimentConfig::slow_n);
    t["slow_length"] = number_key(&ExperimentConfig::slow_length);
    t["k_max"] = number_key(&ExperimentConfig::k_max);
    t["k_samples"] = number_key(&ExperimentConfig::k_samples);
    t["theta"] = number_key(&ExperimentConfig::theta);
    t["T0"] = number_key(&ExperimentConfig::T0);
    t["T1"] = number_key(&ExperimentConfig::T1);
    t["T_eval"] = number_key(&ExperimentConfig::T_eval);
    t["T_end"] = number_key(&ExperimentConfig::T_end);
    t["dt"] = number_key(&ExperimentConfig::dt);
    t["dT"] = number_key(&ExperimentConfig::dT);
    t["stride"] = number_key(&ExperimentConfig::stride);
    t["checkpoints"] = number_key(&ExperimentConfig::checkpoints);
    t["checkpoint"] = number_key(&ExperimentConfig::checkpoint);
    t["amplitude"] = number_key(&ExperimentConfig::amplitude);
    t["k_band"] = number_key(&ExperimentConfig::k_band);
    t["R0"] = number_key(&ExperimentConfig::R0);
    t["cycles"] = number_key(&ExperimentConfig::cycles);
    t["ics"] = number_key(&ExperimentConfig::ics);
    t["E0_min"] = number_key(&ExperimentConfig::E0_min);
    t["E0_max"] = number_key(&ExperimentConfig::E0_max);
    t["inflation"] = number_key(&ExperimentConfig::inflation);
    t["alpha"] = number_key(&ExperimentConfig::alpha);
    t["beta"] = number_key(&ExperimentConfig::beta);
    t["gamma0"] = number_key(&ExperimentConfig::gamma0);
    t["gamma3"] = number_key(&ExperimentConfig::gamma3);
    t["seed"] = number_key(&ExperimentConfig::seed);
    t["workers"] = number_key(&ExperimentConfig::workers);
    t["use_toy_coefficients"] = {
        [](const ExperimentConfig& c) { return std::string(c.use_toy_coefficients ? "true" : "false"); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.use_toy_coefficients = to_bool(k, v); }};
    t["deltas"] = {[](const ExperimentConfig& c) { return join_numbers(c.deltas); },
                   [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                     c.deltas.clear();
                     for (const auto& item : split_list(v)) c.deltas.push_back(to_double(k, item));
                   }};
    t["delta"] = {[](const ExperimentConfig& c) { return join_numbers(c.deltas); },
                  [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                    c.deltas = {to_double(k, v)};
                  }};
    t["sweep.parameter"] = string_key(&ExperimentConfig::sweep_parameter);
    t["sweep.values"] = {[](const ExperimentConfig& c) {
                           std::string s;
                           for (std::size_t i = 0; i < c.sweep_values.size(); ++i)
                             s += (i ? "," : "") + c.sweep_values[i];
                           return s;
                         },
                         [](ExperimentConfig& c, const std::string&, const std::string& v) {
                           c.sweep_values = split_list(v);
                         }};
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"spectrum",    "simulate-rd",  "simulate-amplitude",
                                              "residuals",   "approximation", "attractivity",
                                              "energy",      "global-existence", "coefficients"};
  return names;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto it = keys().find(key);
  if (it == keys().end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second.set(*this, key, trim(value));
}

std::string ExperimentConfig::canonical() const {
  std::string s;
  for (const auto& [k, key] : keys()) {
    if (k == "delta" || k == "out_dir" || k == "workers") continue;
    s += k + " = " + key.get(*this) + "\n";
  }
  return s;
}

void ExperimentConfig::validate() const {
  if (!subcommand.empty() && std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
    throw ConfigError("config: unknown subcommand '" + subcommand + "'");
  if (deltas.empty()) throw ConfigError("config: delta list is empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && deltas[i] < 1.0)) throw ConfigError("config: delta values must lie in (0, 1)");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw ConfigError("config: delta values must be strictly decreasing");
  }
  if (!(eps_over_delta > 0.0 && eps_over_delta <= 1.0))
    throw ConfigError("config: eps_over_delta must lie in (0, 1] so that eps <= min delta");
  if (!(eps >= 0.0 && eps <= deltas.back())) throw ConfigError("config: eps must satisfy 0 <= eps <= min delta");
  if (model != "toy" && model != "brusselator" && model != "file")
    throw ConfigError("config: model must be toy, brusselator or file");
  if (model == "file") {
    if (model_file.empty()) throw ConfigError("config: model = file requires model_file");
    if (!fs::exists(model_file)) throw ConfigError("config: model file '" + model_file + "' does not exist");
  }
  if (!(omega0 > 0.0)) throw ConfigError("config: omega0 must be positive");
  if (fast_n < 8 || fast_n % 2) throw ConfigError("config: fast_n must be even and at least 8");
  if (slow_n < 16 || slow_n % 2) throw ConfigError("config: slow_n must be even and at least 16");
  if (!(length >= 0.0) || !(slow_length > 0.0)) throw ConfigError("config: domain lengths must be positive");
  if (!(k_max > 0.0) || k_samples < 2) throw ConfigError("config: spectrum sampling is invalid");
  if (theta < 1 || theta > kMaxTheta) throw ConfigError("config: theta must lie in [1, " + std::to_string(kMaxTheta) + "]");
  if (!(T0 > 0.0) || !(T1 > 0.0) || !(T_eval > 0.0) || !(T_end > 0.0))
    throw ConfigError("config: time horizons must be positive");
  if (!(dt >= 0.0) || !(dT > 0.0)) throw ConfigError("config: time steps must be positive");
  if (stride < 1 || checkpoints < 1 || !(checkpoint >= dT)) throw ConfigError("config: sampling cadence is invalid");
  if (!(amplitude > 0.0) || !(k_band > 0.0) || !(R0 >= 0.0)) throw ConfigError("config: initial data sizes are invalid");
  if (cycles < 1 || ics < 1) throw ConfigError("config: cycles and ics must be positive");
  if (!(E0_min > 0.0 && E0_max >= E0_min)) throw ConfigError("config: E0 range is invalid");
  if (!(inflation >= 1.0)) throw ConfigError("config: inflation must be at least 1");
  if (!use_toy_coefficients && !(alpha > 0.0)) throw ConfigError("config: alpha must be positive");
  if (workers < 1) throw ConfigError("config: workers must be positive");
  if (!sweep_parameter.empty()) {
    if (sweep_values.empty()) throw ConfigError("config: sweep.values is empty");
    if (!keys().count(sweep_parameter) || sweep_parameter.rfind("sweep.", 0) == 0 || sweep_parameter == "subcommand")
      throw ConfigError("config: cannot sweep over '" + sweep_parameter + "'");
  }
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_config(in);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_field(fields[i]);
  os << "\r\n";
}

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ostringstream& csv(const std::string& name, const std::vector<std::string>& header) {
    auto& os = buffers_[name];
    write_csv_row(os, header);
    return os;
  }

  void row(const std::string& name, const std::vector<double>& values) {
    std::vector<std::string> f;
    for (double v : values) f.push_back(format_number(v));
    write_csv_row(buffers_[name], f);
  }

  void text(const std::string& name, const std::string& content) { buffers_[name] << content; }

  std::vector<std::string> flush(json& manifest_files) {
    std::vector<std::string> names;
    for (auto& [name, os] : buffers_) {
      const std::string bytes = os.str();
      std::ofstream out(dir_ / name, std::ios::binary);
      out << bytes;
      if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
      manifest_files.push_back({{"path", name}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}});
      names.push_back((dir_ / name).string());
    }
    return names;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::map<std::string, std::ostringstream> buffers_;
};

struct Outcome {
  json summary;
  json details;
  bool pass = true;
  std::string message;
};

RDModel make_model(const ExperimentConfig& c, double shift = 0.0) {
  if (c.model == "toy") return toy_model(c.omega0, std::sqrt(c.eps * c.eps + shift));
  if (c.model == "brusselator") return brusselator_cl(c.a, c.b_tilde + shift, c.d1, c.d2, c.d_v);
  return load_model_file(c.model_file);
}

NormalizedCoefficients coefficients_of(const ExperimentConfig& c) {
  if (c.use_toy_coefficients) return normalize(derive_coefficients_toy(c.omega0));
  NormalizedCoefficients n;
  n.alpha = c.alpha;
  n.beta = c.beta;
  n.gamma0 = c.gamma0;
  n.gamma3 = c.gamma3;
  return n;
}

Outcome run_spectrum(const ExperimentConfig& c, Artifacts& out) {
  const RDModel m = make_model(c);
  const auto ks = symmetric_samples(c.k_max, c.k_samples);
  const DispersionData data = dispersion_curves(m.linearization(), ks);
  std::vector<DispersionData> sweep;
  if (c.model != "file")
    for (double h : {1e-3, 2e-3}) sweep.push_back(dispersion_curves(make_model(c, h).linearization(), ks));
  const SpecReport r = check_spec(data, sweep);
  out.csv("dispersion.csv", {"k", "j", "re_lambda", "im_lambda"});
  for (std::size_t j = 0; j < data.curves.size(); ++j)
    for (std::size_t i = 0; i < ks.size(); ++i)
      out.row("dispersion.csv", {ks[i], static_cast<double>(j), data.curves[j][i].real(), data.curves[j][i].imag()});
  Outcome o;
  o.summary = {{"omega0", number(r.omega0)},
               {"re_lambda_at_0", number(r.re_lambda_at_0)},
               {"curvature_at_0", number(r.curvature_at_0)},
               {"other_max_re", number(r.other_max_re)},
               {"parameter_derivative", number(r.parameter_derivative)},
               {"spec_all", r.all()}};
  o.details = {{"critical", r.critical}, {"flat", r.flat},       {"concave", r.concave},
               {"oscillatory", r.oscillatory}, {"others_stable", r.others_stable}, {"transversal", r.transversal},
               {"defective_samples", std::count(data.defective.begin(), data.defective.end(), true)}};
  return o;
}

Outcome run_simulate_rd(const ExperimentConfig& c, Artifacts& out) {
  const RDModel m = make_model(c);
  const double L = c.length > 0.0 ? c.length : 2.0 * M_PI / c.deltas.front();
  const SpectralGrid g = make_grid(c.fast_n, L);
  std::vector<Field> u;
  for (int k = 0; k < m.d; ++k) {
    Field f = random_band_field(g, c.k_band, c.seed + 17 * static_cast<std::uint64_t>(k + 1));
    f *= c.amplitude / std::max(sup_norm(f), 1e-300);
    u.push_back(std::move(f));
  }
  Field v = random_band_field(g, c.k_band, c.seed + 1009);
  v *= c.amplitude * c.amplitude / std::max(sup_norm(v), 1e-300);
  const RDState s0 = RDState::make(std::move(u), std::move(v));
  const double dt = c.dt > 0.0 ? c.dt : dt_heuristic(m, s0);
  const std::vector<Observer> obs{{"mass", [](const RDState& s) { return conserved_mass(s); }},
                                  {"sup_u",
                                   [](const RDState& s) {
                                     double x = 0.0;
                                     for (const auto& f : s.u) x = std::max(x, sup_norm(f));
                                     return x;
                                   }},
                                  {"sup_v", [](const RDState& s) { return sup_norm(s.v); }}};
  const Trajectory tr = integrate(m, s0, c.T_end, dt, obs, c.stride);
  out.csv("series.csv", {"t", "mass", "sup_u", "sup_v"});
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    out.row("series.csv", {tr.t[i], tr.series.at("mass")[i], tr.series.at("sup_u")[i], tr.series.at("sup_v")[i]});
  std::vector<std::string> head{"x"};
  for (int k = 0; k < m.d; ++k) head.push_back("u" + std::to_string(k + 1));
  head.push_back("v");
  out.csv("final_state.csv", head);
  const RDState& f = tr.final_state;
  for (int i = 0; i < g.size(); ++i) {
    std::vector<double> row{g.x(i)};
    for (const auto& comp : f.u) row.push_back(comp[static_cast<std::size_t>(i)].real());
    row.push_back(f.v[static_cast<std::size_t>(i)].real());
    out.row("final_state.csv", row);
  }
  const auto& mass = tr.series.at("mass");
  const double drift = std::abs(mass.back() - mass.front()) / std::max(std::abs(mass.front()), 1e-300);
  Outcome o;
  o.summary = {{"model", m.name}, {"dt", dt}, {"steps", tr.steps}, {"t_end", tr.final_state.t},
               {"mass_relative_drift", number(drift)}};
  return o;
}

Outcome run_simulate_amplitude(const ExperimentConfig& c, Artifacts& out) {
  const NormalizedCoefficients n = coefficients_of(c);
  const SpectralGrid g = slow_grid(c.slow_n, c.slow_length);
  Field A = random_band_field(g, c.k_band, c.seed) + cplx(0.0, 1.0) * random_band_field(g, c.k_band, c.seed + 1);
  A *= c.amplitude / std::max(sup_norm(A), 1e-300);
  Field B = random_band_field(g, c.k_band, c.seed + 2);
  B *= c.amplitude / std::max(sup_norm(B), 1e-300);
  AmplitudeState s{std::move(A), std::move(B), 0.0};
  const double gain = c.eps_over_delta * c.eps_over_delta;
  AmplitudeSolver solver(n.as_raw(), g, c.dT, gain);
  const int total = static_cast<int>(std::lround(c.T_end / c.dT));
  const double mean0 = mean(s.B);
  out.csv("series.csv", {"T", "l2_A", "sup_A", "mean_B"});
  auto record = [&] { out.row("series.csv", {s.T, l2_norm(s.A), sup_norm(s.A), mean(s.B)}); };
  record();
  for (int done = 0; done < total;) {
    const int chunk = std::min(c.stride, total - done);
    solver.advance(s, chunk);
    done += chunk;
    record();
  }
  out.csv("final_state.csv", {"X", "re_A", "im_A", "B"});
  for (int i = 0; i < g.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out.row("final_state.csv", {g.x(i), s.A[idx].real(), s.A[idx].imag(), s.B[idx].real()});
  }
  Outcome o;
  o.summary = {{"alpha", n.alpha}, {"beta", n.beta}, {"gamma0", n.gamma0}, {"gamma3", n.gamma3},
               {"steps", total},   {"T_end", s.T},    {"mean_B_drift", std::abs(mean(s.B) - mean0)}};
  return o;
}

Outcome run_residuals(const ExperimentConfig& c, Artifacts& out) {
  ResidualExperimentConfig rc;
  rc.omega0 = c.omega0;
  rc.eps_over_delta = c.eps_over_delta;
  rc.theta = c.theta;
  rc.deltas = c.deltas;
  rc.T_eval = c.T_eval;
  rc.dT = c.dT;
  rc.slow_n = c.slow_n;
  const ResidualScaling r = residual_experiment(rc);
  out.csv("residuals.csv", {"delta", "res1", "res_s", "res_v"});
  for (std::size_t i = 0; i < r.deltas.size(); ++i)
    out.row("residuals.csv", {r.deltas[i], r.samples[i].res1, r.samples[i].res_s, r.samples[i].res_v});
  Outcome o;
  const bool fitted = r.deltas.size() >= 2;
  const double want1 = c.theta + 2.0, wantv = c.theta + 3.0;
  o.pass = !fitted || (r.slope1 >= want1 - 0.3 && r.slope_v >= wantv - 0.3);
  o.summary = {{"slope_res1", number(fitted ? r.slope1 : NAN)},
               {"slope_res_s", number(fitted ? r.slope_s : NAN)},
               {"slope_res_v", number(fitted ? r.slope_v : NAN)},
               {"expected_res1", want1},
               {"expected_res_v", wantv},
               {"pass", o.pass}};
  if (!o.pass) o.message = "residual slopes below the expected orders";
  return o;
}

Outcome run_approximation(const ExperimentConfig& c, Artifacts& out) {
  ApproximationConfig ac;
  ac.omega0 = c.omega0;
  ac.eps_over_delta = c.eps_over_delta;
  ac.theta = c.theta;
  ac.deltas = c.deltas;
  ac.T0 = c.T0;
  ac.dT = c.dT;
  if (c.dt > 0.0) ac.dt_fast = c.dt;
  ac.slow_n = c.slow_n;
  ac.checkpoints = c.checkpoints;
  ac.seed = c.seed;
  const ApproximationReport r = approximation_experiment(ac);
  out.csv("approximation.csv", {"delta", "T", "error"});
  json cells = json::array();
  double max_error = 0.0;
  for (const auto& cell : r.cells) {
    for (std::size_t i = 0; i < cell.T.size(); ++i) out.row("approximation.csv", {cell.delta, cell.T[i], cell.error[i]});
    cells.push_back({{"delta", cell.delta}, {"max_error", cell.max_error}, {"amplitude_sup", cell.amplitude_sup}});
    max_error = std::max(max_error, cell.max_error);
  }
  Outcome o;
  const bool fitted = r.cells.size() >= 2;
  o.pass = fitted ? r.pass : std::isfinite(max_error);
  o.summary = {{"slope", number(fitted ? r.slope : NAN)}, {"threshold", r.threshold}, {"max_error", max_error},
               {"pass", o.pass}};
  o.details = {{"cells", cells}};
  if (!o.pass) o.message = "approximation error slope below threshold";
  return o;
}

Outcome run_attractivity(const ExperimentConfig& c, Artifacts& out) {
  AttractivityConfig ac;
  ac.omega0 = c.omega0;
  ac.eps_over_delta = c.eps_over_delta;
  ac.theta = c.theta;
  ac.deltas = c.deltas;
  ac.T1 = c.T1;
  if (c.R0 > 0.0) ac.R0 = c.R0;
  ac.k_band = c.k_band;
  if (c.dt > 0.0) ac.dt_fast = c.dt;
  ac.slow_n = c.slow_n;
  ac.seed = c.seed;
  const AttractivityReport r = attractivity_experiment(ac);
  out.csv("attractivity.csv", {"delta", "t", "us_ratio", "esv_ratio", "dxc_ratio", "manifold_distance"});
  for (const auto& cell : r.cells)
    out.row("attractivity.csv",
            {cell.delta, cell.t, cell.us_ratio, cell.esv_ratio, cell.dxc_ratio, cell.manifold_distance});
  Outcome o;
  o.pass = r.pass;
  o.summary = {{"us_spread", number(r.us_spread)},
               {"esv_spread", number(r.esv_spread)},
               {"dxc_spread", number(r.dxc_spread)},
               {"pass", r.pass}};
  if (!o.pass) o.message = "attractivity ratios spread by more than a factor 3";
  return o;
}

Outcome run_energy(const ExperimentConfig& c, Artifacts& out) {
  const NormalizedCoefficients n = coefficients_of(c);
  const SpectralGrid g = slow_grid(c.slow_n, c.slow_length);
  const AbsorbingBound bound = absorbing_bound(g.length(), n.alpha, n.beta);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> pick(c.E0_min, c.E0_max);
  EnergyRunConfig rc;
  rc.T_end = c.T_end;
  rc.dT = c.dT;
  rc.checkpoint = c.checkpoint;
  rc.inflation = c.inflation;
  out.csv("energy.csv", {"ic", "T", "E0", "E1", "rate", "majorant"});
  json runs = json::array();
  Outcome o;
  int entered = 0;
  double worst_margin = INFINITY;
  for (int i = 0; i < c.ics; ++i) {
    const double target = pick(rng);
    const AmplitudeState s0 = random_amplitude_state(g, target, bound.q, c.seed + 101 * static_cast<std::uint64_t>(i + 1));
    const EnergyReport r = energy_run(n, s0, rc);
    for (std::size_t k = 0; k < r.T.size(); ++k)
      out.row("energy.csv", {static_cast<double>(i), r.T[k], r.E0[k], r.E1[k], r.rate[k], r.majorant[k]});
    json viol = json::array();
    for (const auto& v : r.violations)
      viol.push_back({{"kind", v.kind}, {"T", v.T}, {"value", number(v.value)}, {"limit", number(v.limit)}});
    runs.push_back({{"E0_initial", target},
                    {"entry_time", r.entry_time ? json(*r.entry_time) : json(nullptr)},
                    {"asymptotic_radius", r.asymptotic_radius},
                    {"worst_majorant_margin", number(r.worst_majorant_margin)},
                    {"gamma", r.gamma},
                    {"gamma_found", r.gamma_found},
                    {"ok", r.ok()},
                    {"violations", viol}});
    o.pass = o.pass && r.ok();
    entered += r.entry_time ? 1 : 0;
    worst_margin = std::min(worst_margin, r.worst_majorant_margin);
  }
  o.summary = {{"C_inf0", bound.C_inf0}, {"q", bound.q},           {"r", bound.r},
               {"entered", entered},     {"ics", c.ics},           {"worst_majorant_margin", number(worst_margin)},
               {"pass", o.pass}};
  o.details = {{"runs", runs}};
  if (!o.pass) o.message = "absorbing ball diagnostics reported violations";
  return o;
}

Outcome run_global_existence(const ExperimentConfig& c, Artifacts& out) {
  GlobalExistenceConfig gc;
  gc.omega0 = c.omega0;
  gc.eps_over_delta = c.eps_over_delta;
  gc.theta = c.theta;
  gc.delta = c.deltas.front();
  gc.cycles = c.cycles;
  gc.T1 = c.T1;
  gc.T0 = c.T0;
  gc.R0 = c.R0;
  gc.k_band = c.k_band;
  if (c.dt > 0.0) gc.dt_fast = c.dt;
  gc.slow_n = c.slow_n;
  gc.seed = c.seed;
  if (!c.use_toy_coefficients) {
    gc.coefficients = coefficients_of(c).as_raw();
    gc.coefficients_override = true;
  }
  const GlobalExistenceReport r = global_existence_experiment(gc);
  out.csv("global_existence.csv", {"cycle", "t_end", "norm_end", "norm_max", "ratio_end", "approximation_error"});
  for (const auto& cy : r.cycles)
    out.row("global_existence.csv", {static_cast<double>(cy.index), cy.t_end, cy.norm_end, cy.norm_max, cy.ratio_end,
                                     cy.approximation_error});
  Outcome o;
  o.pass = r.pass;
  o.message = r.pass ? "" : r.message;
  o.summary = {{"coeff_ok", r.coeff_ok},
               {"coeff_margin", r.coeff_margin},
               {"R0", r.R0},
               {"initial_norm", r.initial_norm},
               {"escaped", r.escaped},
               {"envelope_non_increasing", r.envelope_non_increasing},
               {"cycles", r.cycles.size()},
               {"pass", r.pass}};
  return o;
}

Outcome run_coefficients(const ExperimentConfig& c, Artifacts& out) {
  const AmplitudeCoefficients raw = derive_coefficients_toy(c.omega0);
  const NormalizedCoefficients n = normalize(raw);
  const CoeffCondition cc = coeff_condition(n);
  out.csv("coefficients.csv", {"omega0", "re_a3", "im_a3", "alpha", "beta", "gamma0", "gamma3", "coeff_margin"});
  out.row("coefficients.csv", {c.omega0, raw.a3.real(), raw.a3.imag(), n.alpha, n.beta, n.gamma0, n.gamma3, cc.margin});
  Outcome o;
  o.summary = {{"omega0", c.omega0}, {"alpha", n.alpha},   {"beta", n.beta},
               {"gamma0", n.gamma0}, {"gamma3", n.gamma3}, {"coeff_margin", cc.margin}};
  o.details = {{"a0", {raw.a0.real(), raw.a0.imag()}}, {"a1", raw.a1}, {"a2", raw.a2},
               {"a3", {raw.a3.real(), raw.a3.imag()}}, {"b0", raw.b0}, {"b1", raw.b1}};
  return o;
}

Outcome dispatch(const ExperimentConfig& c, Artifacts& out) {
  if (c.subcommand == "spectrum") return run_spectrum(c, out);
  if (c.subcommand == "simulate-rd") return run_simulate_rd(c, out);
  if (c.subcommand == "simulate-amplitude") return run_simulate_amplitude(c, out);
  if (c.subcommand == "residuals") return run_residuals(c, out);
  if (c.subcommand == "approximation") return run_approximation(c, out);
  if (c.subcommand == "attractivity") return run_attractivity(c, out);
  if (c.subcommand == "energy") return run_energy(c, out);
  if (c.subcommand == "global-existence") return run_global_existence(c, out);
  if (c.subcommand == "coefficients") return run_coefficients(c, out);
  throw ConfigError("config: unknown subcommand '" + c.subcommand + "'");
}

json versions() {
  json v = json::object();
  v["hopfcl"] = kVersion;
  v["fftw"] = std::string(fftw_version);
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  return v;
}

void write_manifest(Artifacts& out, const ExperimentConfig& c, const json& report, ExitCode code,
                    std::vector<std::string>& files) {
  json listed = json::array();
  const std::string report_text = report.dump(2) + "\n";
  out.text("report.json", report_text);
  files = out.flush(listed);
  const std::string canon = c.canonical();
  json manifest = {{"subcommand", c.subcommand},
                   {"config_hash", hex64(fnv1a64(canon))},
                   {"seed", c.seed},
                   {"exit_code", static_cast<int>(code)},
                   {"versions", versions()},
                   {"config", canon},
                   {"files", listed}};
  std::ofstream mf(out.dir() / "manifest.json", std::ios::binary);
  mf << manifest.dump(2) << "\n";
  files.push_back((out.dir() / "manifest.json").string());
}

RunResult run_single(const ExperimentConfig& c) {
  RunResult res;
  try {
    c.validate();
    if (c.subcommand.empty()) throw ConfigError("config: no subcommand given");
  } catch (const ConfigError& e) {
    res.code = ExitCode::config_error;
    res.message = e.what();
    return res;
  }
  Artifacts out(c.out_dir);
  Outcome o;
  try {
    o = dispatch(c, out);
    res.code = o.pass ? ExitCode::ok : ExitCode::assertion_failed;
    res.message = o.pass ? "ok" : o.message;
  } catch (const ConfigError& e) {
    res.code = ExitCode::config_error;
    res.message = e.what();
  } catch (const std::invalid_argument& e) {
    res.code = ExitCode::config_error;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.code = ExitCode::runtime_failure;
    res.message = e.what();
  }
  json report = {{"subcommand", c.subcommand},
                 {"exit_code", static_cast<int>(res.code)},
                 {"message", res.message},
                 {"summary", o.summary.is_null() ? json::object() : o.summary}};
  if (!o.details.is_null()) report["details"] = o.details;
  res.report_json = report.dump();
  write_manifest(out, c, report, res.code, res.files);
  return res;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  if (!cfg.sweep_parameter.empty()) {
    ExperimentConfig base = cfg;
    base.sweep_parameter.clear();
    base.sweep_values.clear();
    return sweep(base, cfg.sweep_parameter, cfg.sweep_values);
  }
  return run_single(cfg);
}

RunResult sweep(const ExperimentConfig& cfg, const std::string& parameter, const std::vector<std::string>& values) {
  RunResult res;
  std::vector<ExperimentConfig> jobs;
  try {
    if (values.empty()) throw ConfigError("sweep: no values");
    ExperimentConfig probe = cfg;
    probe.sweep_parameter = parameter;
    probe.sweep_values = values;
    probe.validate();
    for (std::size_t i = 0; i < values.size(); ++i) {
      ExperimentConfig job = cfg;
      job.set(parameter, values[i]);
      job.out_dir = (fs::path(cfg.out_dir) / ("run-" + std::to_string(i))).string();
      job.validate();
      jobs.push_back(std::move(job));
    }
  } catch (const ConfigError& e) {
    res.code = ExitCode::config_error;
    res.message = e.what();
    return res;
  }

  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) results[i] = run_single(jobs[i]);
  };
  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json runs = json::array();
  res.code = ExitCode::ok;
  std::vector<double> xs, errs;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const json rep = json::parse(results[i].report_json.empty() ? "{}" : results[i].report_json);
    runs.push_back({{"value", values[i]},
                    {"out_dir", jobs[i].out_dir},
                    {"exit_code", static_cast<int>(results[i].code)},
                    {"message", results[i].message},
                    {"summary", rep.value("summary", json::object())}});
    if (results[i].code != ExitCode::ok && res.code == ExitCode::ok) res.code = results[i].code;
    res.files.insert(res.files.end(), results[i].files.begin(), results[i].files.end());
    const json s = rep.value("summary", json::object());
    if (s.contains("max_error") && s["max_error"].is_number() && jobs[i].deltas.size() == 1) {
      xs.push_back(jobs[i].deltas.front());
      errs.push_back(s["max_error"].get<double>());
    }
  }
  json aggregate = {{"subcommand", cfg.subcommand}, {"parameter", parameter}, {"runs", runs}};
  if (xs.size() >= 2 && std::all_of(errs.begin(), errs.end(), [](double e) { return e > 0.0; })) {
    const double slope = fit_loglog_slope(xs, errs);
    aggregate["error_slope"] = slope;
  }
  aggregate["exit_code"] = static_cast<int>(res.code);
  res.message = res.code == ExitCode::ok ? "ok" : "one or more sweep runs failed";
  res.report_json = aggregate.dump();
  fs::create_directories(cfg.out_dir);
  const std::string text = aggregate.dump(2) + "\n";
  std::ofstream agg(fs::path(cfg.out_dir) / "sweep.json", std::ios::binary);
  agg << text;
  res.files.push_back((fs::path(cfg.out_dir) / "sweep.json").string());
  return res;
}

}  // namespace hopfcl
