#include "hopfcl/rd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hopfcl {

namespace {

Eigen::MatrixXcd rd_symbol(const RDModel& model, double k) {
  const int d = model.d;
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(d + 1, d + 1);
  if (model.jacobian_in_symbol) L.block(0, 0, d, d) = model.jacobian().cast<cplx>();
  for (int i = 0; i < d; ++i) L(i, i) -= model.diffusion[static_cast<std::size_t>(i)] * k * k;
  L(d, d) = -model.d_v * k * k;
  return L;
}

bool all_finite(const std::vector<CVec>& s) {
  for (const auto& c : s)
    for (const auto& z : c)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

std::vector<CVec> to_hat(const RDState& s) {
  std::vector<CVec> out;
  for (const auto& f : s.u) {
    const Field h = f.to_fourier();
    out.emplace_back(h.values().begin(), h.values().end());
  }
  const Field h = s.v.to_fourier();
  out.emplace_back(h.values().begin(), h.values().end());
  return out;
}

double from_hat(const std::vector<CVec>& hat, RDState& s) {
  const SpectralGrid& g = s.grid();
  double residue = 0.0;
  auto load = [&](const CVec& c) {
    Field f(g, c, Space::fourier);
    Field p = f.to_physical();
    residue = std::max(residue, p.imag_residue());
    return p.real_part();
  };
  for (std::size_t c = 0; c < s.u.size(); ++c) s.u[c] = load(hat[c]);
  s.v = load(hat.back());
  return residue;
}

const RDModel& checked(const RDModel& model) {
  model.validate();
  if (model.d > 15) throw std::invalid_argument("RDSolver: at most 15 u-components supported");
  return model;
}

}  // namespace

RDState RDState::make(std::vector<Field> u, Field v, double t) {
  RDState s;
  for (auto& f : u) s.u.push_back(f.to_physical());
  s.v = v.to_physical();
  for (const auto& f : s.u)
    if (!(f.grid() == s.v.grid())) throw std::invalid_argument("RDState: grid mismatch");
  s.t = t;
  s.initial_mass = conserved_mass(s);
  return s;
}

RDState RDState::zeros(const RDModel& model, const SpectralGrid& grid) {
  std::vector<Field> u(static_cast<std::size_t>(model.d), Field::zeros(grid));
  return make(std::move(u), Field::zeros(grid));
}

double conserved_mass(const RDState& state) {
  const Field vh = state.v.to_fourier();
  return state.grid().length() * vh[0].real();
}

RDSolver::RDSolver(const RDModel& model, const SpectralGrid& grid, double dt)
    : model_(checked(model)),
      engine_(grid, model.d + 1, [this](double k) { return rd_symbol(model_, k); }, dt) {
  for (const auto& p : model_.f) f_nl_.push_back(model_.jacobian_in_symbol ? p.without_linear_u_part() : p);
  const auto n = static_cast<std::size_t>(grid.size());
  phys_.assign(static_cast<std::size_t>(model.d + 1), CVec(n));
  fval_.assign(static_cast<std::size_t>(model.d + 1), CVec(n));
  work_.assign(n, 0.0);
}

void RDSolver::nonlinear(const std::vector<CVec>& in, std::vector<CVec>& out) const {
  const int d = model_.d;
  const SpectralGrid& g = engine_.grid();
  const auto n = static_cast<std::size_t>(g.size());
  for (int c = 0; c <= d; ++c) {
    work_ = in[static_cast<std::size_t>(c)];
    dealias(work_);
    fft_inverse(work_, phys_[static_cast<std::size_t>(c)]);
  }
  double z[16];
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c <= d; ++c) z[c] = phys_[static_cast<std::size_t>(c)][i].real();
    for (int c = 0; c < d; ++c) fval_[static_cast<std::size_t>(c)][i] = f_nl_[static_cast<std::size_t>(c)].eval(z);
    fval_[static_cast<std::size_t>(d)][i] = model_.g.eval(z);
  }
  for (int c = 0; c <= d; ++c) {
    auto& o = out[static_cast<std::size_t>(c)];
    fft_forward(fval_[static_cast<std::size_t>(c)], o);
    dealias(o);
  }
  auto& ov = out[static_cast<std::size_t>(d)];
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.wavenumber(static_cast<int>(i));
    ov[i] *= -k * k;
  }
}

void RDSolver::rhs_hat(const std::vector<CVec>& s, std::vector<CVec>& out) const {
  const int d = model_.d;
  const SpectralGrid& g = engine_.grid();
  const auto n = static_cast<std::size_t>(g.size());
  out.assign(static_cast<std::size_t>(d + 1), CVec(n));
  nonlinear(s, out);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::MatrixXcd L = rd_symbol(model_, g.wavenumber(static_cast<int>(i)));
    for (int r = 0; r <= d; ++r)
      for (int c = 0; c <= d; ++c) out[static_cast<std::size_t>(r)][i] += L(r, c) * s[static_cast<std::size_t>(c)][i];
  }
}

void RDSolver::advance(RDState& state, int steps) {
  if (static_cast<int>(state.u.size()) != model_.d) throw std::invalid_argument("RDSolver: component count");
  if (!(state.grid() == engine_.grid())) throw std::invalid_argument("RDSolver: grid mismatch");
  if (steps <= 0) return;
  state_hat_ = to_hat(state);
  std::vector<CVec> last = state_hat_;
  double t = state.t;
  const auto nl = [this](const std::vector<CVec>& in, std::vector<CVec>& out) { nonlinear(in, out); };
  for (int s = 0; s < steps; ++s) {
    engine_.step(state_hat_, nl);
    if (!all_finite(state_hat_)) {
      RDState good = state;
      from_hat(last, good);
      good.t = t;
      throw SolverError("RDSolver: non-finite state at t = " + std::to_string(t + engine_.dt()), good);
    }
    t += engine_.dt();
    if (s + 1 < steps) last = state_hat_;
  }
  imag_residue_ = from_hat(state_hat_, state);
  state.t = t;
}

void RDSolver::step(RDState& state) { advance(state, 1); }

RDState step(const RDModel& model, const RDState& state, double dt) {
  RDSolver solver(model, state.grid(), dt);
  RDState out = state;
  solver.step(out);
  return out;
}

Trajectory integrate(const RDModel& model, const RDState& state, double t_end, double dt,
                     const std::vector<Observer>& observers, int stride, std::size_t max_samples) {
  if (t_end < 0.0) throw std::invalid_argument("integrate: negative t_end");
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (stride < 1) throw std::invalid_argument("integrate: stride must be >= 1");
  Trajectory tr;
  tr.final_state = state;
  tr.stride = stride;
  auto record = [&](const RDState& s) {
    tr.t.push_back(s.t);
    for (const auto& o : observers) tr.series[o.name].push_back(o.fn(s));
    if (max_samples >= 2 && tr.t.size() > max_samples) {
      auto thin = [](std::vector<double>& v) {
        std::vector<double> w;
        for (std::size_t i = 0; i < v.size(); i += 2) w.push_back(v[i]);
        v.swap(w);
      };
      thin(tr.t);
      for (auto& [name, v] : tr.series) thin(v);
      tr.stride *= 2;
    }
  };
  record(state);
  if (t_end == 0.0) return tr;
  const int n_steps = std::max(1, static_cast<int>(std::ceil(t_end / dt - 1e-9)));
  RDSolver solver(model, state.grid(), t_end / n_steps);
  RDState s = state;
  const double t0 = state.t;
  int done = 0;
  while (done < n_steps) {
    const int next = std::min(n_steps, (done / tr.stride + 1) * tr.stride);
    solver.advance(s, next - done);
    done = next;
    s.t = t0 + t_end * done / n_steps;
    if (done % tr.stride == 0) record(s);
  }
  tr.steps = n_steps;
  tr.final_state = s;
  return tr;
}

double dt_heuristic(const RDModel& model, const RDState& state) {
  double M = 1e-3;
  for (const auto& f : state.u) M = std::max(M, sup_norm(f));
  M = std::max(M, sup_norm(state.v));
  double rate = 0.0;
  for (const auto& p : model.f) {
    double r = 0.0;
    const Polynomial q = model.jacobian_in_symbol ? p.without_linear_u_part() : p;
    for (const auto& t : q.terms) r += std::abs(t.coeff) * t.degree() * std::pow(M, t.degree() - 1);
    rate = std::max(rate, r);
  }
  if (rate <= 0.0) return 1.0;
  return std::min(1.0, 0.4 / rate);
}

SpectralGrid fast_grid(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("fast_grid: delta must be positive");
  int n = std::max(128, static_cast<int>(std::ceil(24.0 / delta)));
  if (n % 2) ++n;
  return make_grid(n, 2.0 * M_PI / delta);
}

NormalFormKernels normal_form_kernels(double omega0, double n11, double n1m1, double nm1m1) {
  const cplx l1(0.0, omega0), lm1(0.0, -omega0);
  return {n11 / (l1 - l1 - l1), n1m1 / (l1 - l1 - lm1), nm1m1 / (l1 - lm1 - lm1)};
}

RDState normal_form_toy(const RDState& state, double omega0, Direction direction) {
  if (state.u.size() != 2) throw std::invalid_argument("normal_form_toy: expects the toy model's two u-components");
  const NormalFormKernels b = normal_form_kernels(omega0);
  const Field p = state.u[0].to_physical();
  const Field q = state.u[1].to_physical();
  const std::size_t n = p.size();
  auto quad = [&](cplx c) { return b.b11 * c * c + b.b1m1 * c * std::conj(c) + b.bm1m1 * std::conj(c) * std::conj(c); };
  CVec out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx in(p[i].real(), q[i].real());
    if (direction == Direction::forward) {
      out[i] = in + quad(in);
      continue;
    }
    cplx c = in;
    const double tol = 1e-15 * std::max(1.0, std::abs(in));
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      const cplx next = in - quad(c);
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
      const double change = std::abs(next - c);
      c = next;
      if (change <= tol) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw std::runtime_error("normal_form_toy: fixed-point iteration did not converge at |u| = " +
                               std::to_string(std::abs(in)));
    out[i] = c;
  }
  RDState s = state;
  CVec re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = out[i].real();
    im[i] = out[i].imag();
  }
  s.u[0] = Field(p.grid(), re);
  s.u[1] = Field(p.grid(), im);
  return s;
}

}  // namespace hopfcl
