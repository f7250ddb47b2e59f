#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hopfcl/approximation.hpp"

namespace hopfcl {

namespace {

Field default_A0(const SpectralGrid& slow) {
  return Field::from_function(slow, [](double X) { return cplx(0.8 + 0.3 * std::cos(X), 0.2 * std::sin(X)); });
}

Field default_B0(const SpectralGrid& slow) {
  return Field::from_function(slow, [](double X) { return cplx(0.3 * std::cos(X), 0.0); });
}

double combined_ul(const std::vector<Field>& u, int order) {
  double s = 0.0;
  for (const auto& f : u) {
    const double x = ul_norm(f, order);
    s += x * x;
  }
  return std::sqrt(s);
}

int steps_for(double span, double dt) { return std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9))); }

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

RDState random_state(const SpectralGrid& fast, int d, double k_band, std::uint64_t seed, double u_norm, double v_norm) {
  std::vector<Field> u;
  for (int c = 0; c < d; ++c) u.push_back(random_band_field(fast, k_band, seed + 17 * static_cast<std::uint64_t>(c + 1)));
  const double nu = combined_ul(u, 2);
  for (auto& f : u) f *= u_norm / nu;
  Field v = random_band_field(fast, k_band, seed + 1009);
  v *= v_norm / ul_norm(v, 1);
  return RDState::make(std::move(u), std::move(v));
}

RDModel linear_part(const RDModel& m) {
  RDModel out = m;
  for (auto& p : out.f) p = p.linear_u_part();
  out.g = Polynomial{};
  out.name = m.name + "-linear";
  return out;
}

}  // namespace

ApproximationReport approximation_experiment(const ApproximationConfig& cfg) {
  if (cfg.deltas.empty()) throw std::invalid_argument("approximation_experiment: empty delta list");
  if (cfg.checkpoints < 1 || !(cfg.T0 > 0.0) || !(cfg.dT > 0.0) || !(cfg.dt_fast > 0.0))
    throw std::invalid_argument("approximation_experiment: invalid time stepping");
  const SpectralGrid slow = slow_grid(cfg.slow_n);
  const Field A0 = cfg.A0.size() ? cfg.A0 : default_A0(slow);
  const Field B0 = cfg.B0.size() ? cfg.B0 : default_B0(slow);
  const AnsatzSpec spec{cfg.theta, cfg.omega0, cfg.eps_over_delta};
  const ToyHierarchy h(spec, slow);
  const double dTc = cfg.T0 / cfg.checkpoints;
  const int slow_steps = static_cast<int>(std::lround(dTc / cfg.dT));
  if (std::abs(slow_steps * cfg.dT - dTc) > 1e-9 * dTc)
    throw std::invalid_argument("approximation_experiment: checkpoint spacing must be a multiple of dT");

  ApproximationReport rep;
  rep.threshold = cfg.theta - 0.4;
  for (double delta : cfg.deltas) {
    const RDModel model = toy_model(cfg.omega0, cfg.eps_over_delta * delta);
    const SpectralGrid fast = fast_grid_for(delta, cfg.slow_n);
    ToyHierarchy::State S = h.initial(A0, B0);
    RDState u = h.reconstruct(S, delta, 0.0, fast);
    ApproximationCell cell;
    cell.delta = delta;
    if (cfg.ic_perturbation > 0.0) {
      RDState r = random_state(fast, model.d, 1.0, cfg.seed, 1.0, 1.0);
      const double nr = scaled_state_norm(r, delta, cfg.norm_order);
      const double amp = cfg.ic_perturbation * std::pow(delta, cfg.theta) / nr;
      for (std::size_t c = 0; c < u.u.size(); ++c) u.u[c] += amp * r.u[c];
      u.v += amp * r.v;
      cell.ic_error = scaled_error_norm(u, h.reconstruct(S, delta, 0.0, fast), delta, cfg.norm_order);
    }
    const double t_span = dTc / (delta * delta);
    const int fast_steps = steps_for(t_span, cfg.dt_fast);
    RDSolver solver(model, fast, t_span / fast_steps);
    for (int c = 1; c <= cfg.checkpoints; ++c) {
      try {
        solver.advance(u, fast_steps);
      } catch (const SolverError& e) {
        throw std::runtime_error("approximation_experiment: original system failed at delta = " +
                                 std::to_string(delta) + ": " + e.what());
      }
      h.advance(S, slow_steps, cfg.dT);
      const double amp = sup_norm(S.evolved.front());
      cell.amplitude_sup = std::max(cell.amplitude_sup, amp);
      if (!(amp < 1e3))
        throw std::runtime_error("approximation_experiment: amplitude solution unbounded at T = " +
                                 std::to_string(S.T));
      const double t = c * t_span;
      u.t = t;
      const RDState psi = h.reconstruct(S, delta, t, fast);
      const double err = scaled_error_norm(u, psi, delta, cfg.norm_order);
      cell.T.push_back(S.T);
      cell.error.push_back(err);
      cell.max_error = std::max(cell.max_error, err);
    }
    rep.cells.push_back(std::move(cell));
  }
  std::vector<double> d, e;
  bool all_zero = true;
  for (const auto& c : rep.cells) {
    d.push_back(c.delta);
    e.push_back(c.max_error);
    if (c.max_error > 0.0) all_zero = false;
  }
  if (all_zero) {
    rep.slope = std::numeric_limits<double>::infinity();
    rep.pass = true;
  } else if (rep.cells.size() >= 2 && std::all_of(e.begin(), e.end(), [](double x) { return x > 0.0; })) {
    rep.slope = fit_loglog_slope(d, e);
    rep.pass = rep.slope >= rep.threshold;
  } else {
    rep.slope = std::numeric_limits<double>::quiet_NaN();
    rep.pass = false;
  }
  return rep;
}

AttractivityReport attractivity_experiment(const AttractivityConfig& cfg) {
  if (cfg.deltas.empty()) throw std::invalid_argument("attractivity_experiment: empty delta list");
  const SpectralGrid slow = slow_grid(cfg.slow_n);
  const AnsatzSpec spec{cfg.theta, cfg.omega0, cfg.eps_over_delta};
  const ToyHierarchy h(spec, slow);
  AttractivityReport rep;
  for (double delta : cfg.deltas) {
    const RDModel full = toy_model(cfg.omega0, cfg.eps_over_delta * delta);
    const RDModel model = cfg.linear ? linear_part(full) : full;
    const ModelLinearization lin = full.linearization();
    const SpectralGrid fast = fast_grid_for(delta, cfg.slow_n);
    RDState u;
    if (cfg.start_on_manifold) {
      const Field A0 = cfg.A0.size() ? cfg.A0 : default_A0(slow);
      const Field B0 = cfg.B0.size() ? cfg.B0 : default_B0(slow);
      u = h.reconstruct(h.initial(A0, B0), delta, 0.0, fast);
    } else {
      u = random_state(fast, model.d, cfg.k_band, cfg.seed, cfg.R0 * delta, cfg.R0 * delta * delta);
    }
    AttractivityCell cell;
    cell.delta = delta;
    const double d2 = delta * delta;
    cell.us_initial_ratio = combined_ul(mode_split(u.u, lin, cfg.delta_tilde).us, 2) / d2;
    const double t_end = cfg.T1 / d2;
    const int steps = steps_for(t_end, cfg.dt_fast);
    RDSolver solver(model, fast, t_end / steps);
    solver.advance(u, steps);
    u.t = t_end;
    cell.t = t_end;

    const ModeSplit split = mode_split(u.u, lin, cfg.delta_tilde);
    cell.us_ratio = combined_ul(split.us, 2) / d2;
    cell.esv_ratio = ul_norm(u.v - mode_filter(u.v, cfg.delta_tilde), 1) / d2;
    ModeSplit only_c1{split.c1, Field::zeros(fast), {}};
    for (std::size_t c = 0; c < split.us.size(); ++c) only_c1.us.push_back(Field::zeros(fast));
    std::vector<Field> e1u = mode_combine(only_c1, lin);
    for (auto& f : e1u) f = derivative(f, 1);
    cell.dxc_ratio = combined_ul(e1u, 1) / d2;

    const ExtractedAmplitudes ext =
        extract_amplitudes(u, lin, delta, cfg.delta_tilde, full.critical_vector(), slow, cfg.omega0);
    ToyHierarchy::State S = h.initial(ext.A1, ext.B0);
    h.match_initial_harmonics(S, t_end);
    const RDState psi = h.reconstruct(S, delta, t_end, fast);
    cell.manifold_distance = scaled_error_norm(u, psi, delta);
    RDState diff = u;
    for (std::size_t c = 0; c < diff.u.size(); ++c) diff.u[c] -= psi.u[c];
    diff.v -= psi.v;
    cell.manifold_distance_ul = scaled_state_norm_ul(diff, delta);
    rep.cells.push_back(cell);
  }
  std::vector<double> a, b, c;
  for (const auto& cell : rep.cells) {
    a.push_back(cell.us_ratio);
    b.push_back(cell.esv_ratio);
    c.push_back(cell.dxc_ratio);
  }
  rep.us_spread = spread(a);
  rep.esv_spread = spread(b);
  rep.dxc_spread = spread(c);
  rep.pass = rep.us_spread <= 3.0 && rep.esv_spread <= 3.0 && rep.dxc_spread <= 3.0;
  return rep;
}

GlobalExistenceReport global_existence_experiment(const GlobalExistenceConfig& cfg) {
  if (cfg.cycles < 1) throw std::invalid_argument("global_existence_experiment: need at least one cycle");
  GlobalExistenceReport rep;
  const AmplitudeCoefficients raw = cfg.coefficients_override ? cfg.coefficients : derive_coefficients_toy(cfg.omega0);
  const CoeffCondition cc = coeff_condition(normalize(raw));
  rep.coeff_ok = cc.satisfied;
  rep.coeff_margin = cc.margin;
  if (!cc.satisfied) {
    rep.message = "coefficient condition 1 + beta/alpha > 0 violated (margin " + std::to_string(cc.margin) + ")";
    return rep;
  }
  const double delta = cfg.delta;
  const RDModel model = toy_model(cfg.omega0, cfg.eps_over_delta * delta);
  const ModelLinearization lin = model.linearization();
  const SpectralGrid slow = slow_grid(cfg.slow_n);
  const SpectralGrid fast = fast_grid_for(delta, cfg.slow_n);
  const AnsatzSpec spec{cfg.theta, cfg.omega0, cfg.eps_over_delta};
  const ToyHierarchy h(spec, slow);

  if (cfg.R0 > 0.0) {
    rep.R0 = cfg.R0;
  } else {
    const double amp = std::sqrt(cfg.eps_over_delta * cfg.eps_over_delta * raw.a1 / raw.a3.real());
    const ToyHierarchy::State orbit =
        h.initial(Field::from_function(slow, [amp](double) { return cplx(amp, 0.0); }), Field::zeros(slow));
    rep.R0 = 4.0 * scaled_state_norm_ul(h.reconstruct(orbit, delta, 0.0, fast), delta) / delta;
  }
  const double budget = rep.R0 * delta;

  RDState u = RDState::zeros(model, fast);
  if (!cfg.zero_ic) {
    const double part = cfg.ic_fraction * budget / std::sqrt(2.0);
    u = random_state(fast, model.d, cfg.k_band, cfg.seed, part, part * delta);
  }
  rep.initial_norm = scaled_state_norm_ul(u, delta);

  const double d2 = delta * delta;
  const double sample_span = 1.0;
  auto run_fast = [&](double span, double& norm_max) {
    const int samples = steps_for(span, sample_span);
    const double dt_sample = span / samples;
    const int steps = steps_for(dt_sample, cfg.dt_fast);
    RDSolver s(model, fast, dt_sample / steps);
    const double t0 = u.t;
    for (int i = 1; i <= samples; ++i) {
      s.advance(u, steps);
      u.t = t0 + i * dt_sample;
      norm_max = std::max(norm_max, scaled_state_norm_ul(u, delta));
    }
  };

  rep.attractivity_norm_max = rep.initial_norm;
  run_fast(cfg.T1 / d2, rep.attractivity_norm_max);
  if (rep.attractivity_norm_max > budget * (1.0 + 1e-9)) {
    rep.escaped = true;
    rep.escape_cycle = 0;
    rep.message = "norm left the R0 delta ball during the attractivity phase";
    return rep;
  }

  const int sub = 20;
  const double dT_sub = cfg.T0 / sub;
  const double dT = 1e-3;
  const int slow_steps = std::max(1, static_cast<int>(std::lround(dT_sub / dT)));
  for (int c = 1; c <= cfg.cycles; ++c) {
    GlobalExistenceCycle cyc;
    cyc.index = c;
    const ExtractedAmplitudes ext =
        extract_amplitudes(u, lin, delta, cfg.delta_tilde, model.critical_vector(), slow, cfg.omega0);
    ToyHierarchy::State S = h.initial(ext.A1, ext.B0);
    h.match_initial_harmonics(S, u.t);
    for (int i = 1; i <= sub; ++i) {
      run_fast(dT_sub / d2, cyc.norm_max);
      h.advance(S, slow_steps, dT_sub / slow_steps);
      const RDState psi = h.reconstruct(S, delta, u.t, fast);
      RDState diff = u;
      for (std::size_t k = 0; k < diff.u.size(); ++k) diff.u[k] -= psi.u[k];
      diff.v -= psi.v;
      cyc.approximation_error = std::max(cyc.approximation_error, scaled_state_norm_ul(diff, delta));
    }
    cyc.t_end = u.t;
    cyc.norm_end = scaled_state_norm_ul(u, delta);
    cyc.ratio_end = cyc.norm_end / budget;
    rep.cycles.push_back(cyc);
    if (cyc.norm_max > budget * (1.0 + 1e-9)) {
      rep.escaped = true;
      rep.escape_cycle = c;
      rep.message = "norm left the R0 delta ball in cycle " + std::to_string(c);
      break;
    }
  }
  rep.envelope_non_increasing = true;
  for (std::size_t i = 2; i < rep.cycles.size(); ++i)
    if (rep.cycles[i].norm_max > rep.cycles[i - 1].norm_max * 1.01) rep.envelope_non_increasing = false;
  bool contraction = !rep.cycles.empty();
  for (const auto& cyc : rep.cycles)
    if (cyc.ratio_end > 0.75) contraction = false;
  rep.pass = !rep.escaped && contraction && static_cast<int>(rep.cycles.size()) == cfg.cycles;
  if (rep.message.empty()) rep.message = rep.pass ? "ok" : "re-entry factor above 3/4";
  return rep;
}

}  // namespace hopfcl
