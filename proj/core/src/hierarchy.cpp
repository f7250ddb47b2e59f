#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hopfcl/approximation.hpp"

namespace hopfcl {

namespace {

void axpy(CVec& acc, cplx s, const CVec& x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * x[i];
}

void add_product(CVec& acc, cplx s, const CVec& a, const CVec& b) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * a[i] * b[i];
}

}  // namespace

ToyHierarchy::ToyHierarchy(const AnsatzSpec& spec, const SpectralGrid& slow) : spec_(spec), slow_(slow) {
  spec_.validate();
  if (slow.size() < 16) throw std::invalid_argument("ToyHierarchy: slow grid too small");
  for (int p = 1; p <= spec_.theta; ++p) evolved_.push_back({'F', p, 1});
  for (int p = 2; p <= spec_.theta + 1; ++p) evolved_.push_back({'G', p, 0});
}

std::optional<std::size_t> ToyHierarchy::evolved_index(char kind, int p) const {
  for (std::size_t i = 0; i < evolved_.size(); ++i)
    if (evolved_[i].kind == kind && evolved_[i].p == p) return i;
  return std::nullopt;
}

ToyHierarchy::State ToyHierarchy::initial(const Field& A1, const Field& B0) const {
  if (!(A1.grid() == slow_) || !(B0.grid() == slow_)) throw std::invalid_argument("ToyHierarchy: grid mismatch");
  State s;
  for (const auto& id : evolved_) {
    if (id.kind == 'F' && id.p == 1)
      s.evolved.push_back(A1.to_physical());
    else if (id.kind == 'G' && id.p == 2)
      s.evolved.push_back(B0.to_physical());
    else
      s.evolved.push_back(Field::zeros(slow_));
  }
  return s;
}

void ToyHierarchy::match_initial_harmonics(State& s, double t) const {
  const auto idx = evolved_index('F', 2);
  if (!idx) return;
  s.evolved[*idx] = Field::zeros(slow_);
  Jets J = jets(s);
  const std::size_t n = static_cast<std::size_t>(slow_.size());
  CVec corr(n, 0.0);
  for (int m : {0, 2, -2}) {
    const cplx ph = std::polar(1.0, (m - 1) * spec_.omega0 * t);
    axpy(corr, -ph, J.F(2, m, 0));
  }
  s.evolved[*idx] = Field(slow_, corr);
}

std::vector<ToyHierarchy::FieldId> ToyHierarchy::included() const {
  std::vector<FieldId> out;
  const int P = spec_.theta + 1;
  for (int p = 1; p <= P; ++p)
    for (int m = -p; m <= p; ++m) out.push_back({'F', p, m});
  for (int p = 2; p <= P; ++p)
    for (int m = -p; m <= p; ++m) out.push_back({'G', p, m});
  return out;
}

ToyHierarchy::Jets::Jets(const ToyHierarchy& h, const std::vector<CVec>& evolved_physical)
    : h_(h), evolved_(evolved_physical) {
  zero_.v.assign(static_cast<std::size_t>(h.slow_.size()), 0.0);
  zero_.zero = true;
}

CVec ToyHierarchy::Jets::d2(const CVec& f) const {
  const SpectralGrid& g = h_.slow_;
  CVec hat(f.size()), out(f.size());
  fft_forward(f, hat);
  for (int i = 0; i < g.size(); ++i) {
    const double k = g.wavenumber(i);
    hat[static_cast<std::size_t>(i)] *= -k * k;
  }
  fft_inverse(hat, out);
  return out;
}

const ToyHierarchy::Jets::Entry& ToyHierarchy::Jets::get(char kind, int p, int m, int j) {
  const Key key{kind, p, m, j};
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  Entry e = compute(kind, p, m, j);
  return memo_.emplace(key, std::move(e)).first->second;
}

ToyHierarchy::Jets::Entry ToyHierarchy::Jets::H(int p, int m, int j) {
  const Entry& f = get('F', p, -m, j);
  if (f.zero) return zero_;
  Entry out{f.v, false};
  for (auto& z : out.v) z = std::conj(z);
  return out;
}

ToyHierarchy::Jets::Entry ToyHierarchy::Jets::compute(char kind, int p, int m, int j) {
  const double w0 = h_.spec_.omega0;
  const double k2 = h_.spec_.kappa * h_.spec_.kappa;
  const std::size_t n = zero_.v.size();
  Entry out{CVec(n, 0.0), true};
  auto mark = [&] {
    out.zero = std::all_of(out.v.begin(), out.v.end(), [](cplx z) { return z == cplx(0.0); });
  };

  if (kind == 'F') {
    if (p < 1 || std::abs(m) > p) return zero_;
    if (m == 1) {
      const auto idx = h_.evolved_index('F', p);
      if (!idx) return zero_;
      if (j == 0) {
        out.v = evolved_[*idx];
      } else {
        const Entry& prev = get('F', p, 1, j - 1);
        if (!prev.zero) {
          out.v = d2(prev.v);
          axpy(out.v, k2, prev.v);
        }
        const Entry& nl = get('N', p + 2, 1, j - 1);
        if (!nl.zero) axpy(out.v, 1.0, nl.v);
        for (auto& z : out.v) z /= static_cast<double>(j);
      }
      mark();
      return out;
    }
    const Entry& nl = get('N', p, m, j);
    if (!nl.zero) out.v = nl.v;
    const Entry& lower = get('F', p - 2, m, j);
    if (!lower.zero) {
      axpy(out.v, 1.0, d2(lower.v));
      axpy(out.v, k2, lower.v);
    }
    const Entry& lower_t = get('F', p - 2, m, j + 1);
    if (!lower_t.zero) axpy(out.v, -static_cast<double>(j + 1), lower_t.v);
    const cplx den(0.0, (m - 1) * w0);
    for (auto& z : out.v) z /= den;
    mark();
    return out;
  }

  if (kind == 'G') {
    if (p < 2 || std::abs(m) > p) return zero_;
    if (m == 0) {
      const auto idx = h_.evolved_index('G', p);
      if (!idx) return zero_;
      if (j == 0) {
        out.v = evolved_[*idx];
      } else {
        const Entry& prev = get('G', p, 0, j - 1);
        CVec sum(n, 0.0);
        if (!prev.zero) sum = prev.v;
        const Entry& q = get('Q', p, 0, j - 1);
        if (!q.zero) axpy(sum, 1.0, q.v);
        out.v = d2(sum);
        for (auto& z : out.v) z /= static_cast<double>(j);
      }
      mark();
      return out;
    }
    CVec sum(n, 0.0);
    const Entry& lower = get('G', p - 2, m, j);
    if (!lower.zero) sum = lower.v;
    const Entry& q = get('Q', p - 2, m, j);
    if (!q.zero) axpy(sum, 1.0, q.v);
    out.v = d2(sum);
    const Entry& lower_t = get('G', p - 2, m, j + 1);
    if (!lower_t.zero) axpy(out.v, -static_cast<double>(j + 1), lower_t.v);
    const cplx den(0.0, m * w0);
    for (auto& z : out.v) z /= den;
    mark();
    return out;
  }

  if (kind == 'Q') {
    // |u_1|^2 at order p, harmonic m
    for (int a = 1; a < p; ++a) {
      const int b = p - a;
      for (int m1 = -a; m1 <= a; ++m1) {
        const int m2 = m - m1;
        if (std::abs(m2) > b) continue;
        for (int i = 0; i <= j; ++i) {
          const Entry& f = get('F', a, m1, i);
          if (f.zero) continue;
          const Entry hb = H(b, m2, j - i);
          if (hb.zero) continue;
          add_product(out.v, 1.0, f.v, hb.v);
        }
      }
    }
    mark();
    return out;
  }

  if (kind == 'N') {
    // u^2 + |u|^2 + ubar^2 + v (u + ubar) - |u|^2 u at order p, harmonic m
    for (int a = 1; a < p; ++a) {
      const int b = p - a;
      for (int m1 = -a; m1 <= a; ++m1) {
        const int m2 = m - m1;
        if (std::abs(m2) > b) continue;
        for (int i = 0; i <= j; ++i) {
          const Entry& fa = get('F', a, m1, i);
          const Entry ha = H(a, m1, i);
          if (fa.zero && ha.zero) continue;
          const Entry& fb = get('F', b, m2, j - i);
          const Entry hb = H(b, m2, j - i);
          if (!fa.zero && !fb.zero) add_product(out.v, 1.0, fa.v, fb.v);
          if (!fa.zero && !hb.zero) add_product(out.v, 1.0, fa.v, hb.v);
          if (!ha.zero && !hb.zero) add_product(out.v, 1.0, ha.v, hb.v);
        }
      }
    }
    for (int a = 2; a < p; ++a) {
      const int b = p - a;
      for (int m1 = -a; m1 <= a; ++m1) {
        const int m2 = m - m1;
        if (std::abs(m2) > b) continue;
        for (int i = 0; i <= j; ++i) {
          const Entry& ga = get('G', a, m1, i);
          if (ga.zero) continue;
          const Entry& fb = get('F', b, m2, j - i);
          const Entry hb = H(b, m2, j - i);
          if (!fb.zero) add_product(out.v, 1.0, ga.v, fb.v);
          if (!hb.zero) add_product(out.v, 1.0, ga.v, hb.v);
        }
      }
    }
    for (int a = 1; a < p - 1; ++a)
      for (int b = 1; a + b < p; ++b) {
        const int c = p - a - b;
        for (int m1 = -a; m1 <= a; ++m1)
          for (int m2 = -b; m2 <= b; ++m2) {
            const int m3 = m - m1 - m2;
            if (std::abs(m3) > c) continue;
            for (int i1 = 0; i1 <= j; ++i1)
              for (int i2 = 0; i1 + i2 <= j; ++i2) {
                const Entry& fa = get('F', a, m1, i1);
                if (fa.zero) continue;
                const Entry& fb = get('F', b, m2, i2);
                if (fb.zero) continue;
                const Entry hc = H(c, m3, j - i1 - i2);
                if (hc.zero) continue;
                for (std::size_t x = 0; x < n; ++x) out.v[x] -= fa.v[x] * fb.v[x] * hc.v[x];
              }
          }
      }
    mark();
    return out;
  }
  throw std::logic_error("ToyHierarchy: unknown coefficient kind");
}

const CVec& ToyHierarchy::Jets::F(int p, int m, int j) { return get('F', p, m, j).v; }
const CVec& ToyHierarchy::Jets::G(int p, int m, int j) { return get('G', p, m, j).v; }
const CVec& ToyHierarchy::Jets::N(int p, int m, int j) { return get('N', p, m, j).v; }
const CVec& ToyHierarchy::Jets::Q(int p, int m, int j) { return get('Q', p, m, j).v; }
bool ToyHierarchy::Jets::is_zero(char kind, int p, int m, int j) { return get(kind, p, m, j).zero; }
Field ToyHierarchy::Jets::field(char kind, int p, int m, int j) { return Field(h_.slow_, get(kind, p, m, j).v); }

ToyHierarchy::Jets ToyHierarchy::jets(const State& s) const {
  if (s.evolved.size() != evolved_.size()) throw std::invalid_argument("ToyHierarchy: state size mismatch");
  std::vector<CVec> phys;
  for (const auto& f : s.evolved) {
    const Field p = f.to_physical();
    phys.emplace_back(p.values().begin(), p.values().end());
  }
  return Jets(*this, phys);
}

void ToyHierarchy::evolved_rhs(const std::vector<CVec>& hat, std::vector<CVec>& out) const {
  const std::size_t n = static_cast<std::size_t>(slow_.size());
  std::vector<CVec> phys;
  CVec work(n);
  for (const auto& h : hat) {
    work = h;
    dealias(work);
    CVec p(n);
    fft_inverse(work, p);
    phys.push_back(std::move(p));
  }
  Jets J(*this, phys);
  for (std::size_t e = 0; e < evolved_.size(); ++e) {
    const auto& id = evolved_[e];
    CVec& o = out[e];
    if (id.kind == 'F') {
      fft_forward(J.N(id.p + 2, 1, 0), o);
    } else {
      fft_forward(J.Q(id.p, 0, 0), o);
      for (std::size_t i = 0; i < n; ++i) {
        const double k = slow_.wavenumber(static_cast<int>(i));
        o[i] *= -k * k;
      }
    }
    dealias(o);
  }
}

void ToyHierarchy::advance(State& s, int steps, double dT) const {
  if (!(dT > 0.0)) throw std::invalid_argument("ToyHierarchy::advance: dT must be positive");
  if (steps <= 0) return;
  auto& engine = engines_[dT];
  if (!engine) {
    const double k2 = spec_.kappa * spec_.kappa;
    const auto ids = evolved_;
    engine = std::make_shared<Etdrk4>(
        slow_, static_cast<int>(ids.size()),
        [ids, k2](double k) {
          const auto m = static_cast<Eigen::Index>(ids.size());
          Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(m, m);
          for (Eigen::Index e = 0; e < m; ++e)
            L(e, e) = -k * k + (ids[static_cast<std::size_t>(e)].kind == 'F' ? k2 : 0.0);
          return L;
        },
        dT);
  }
  std::vector<CVec> hat;
  for (const auto& f : s.evolved) {
    const Field h = f.to_fourier();
    hat.emplace_back(h.values().begin(), h.values().end());
  }
  const auto nl = [this](const std::vector<CVec>& in, std::vector<CVec>& out) { evolved_rhs(in, out); };
  for (int i = 0; i < steps; ++i) {
    engine->step(hat, nl);
    for (const auto& c : hat)
      for (const auto& z : c)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
          throw std::runtime_error("ToyHierarchy: non-finite state at T = " + std::to_string(s.T + (i + 1) * dT));
  }
  for (std::size_t e = 0; e < hat.size(); ++e) {
    Field f = Field(slow_, hat[e], Space::fourier).to_physical();
    s.evolved[e] = evolved_[e].kind == 'G' ? f.real_part() : f;
  }
  s.T += steps * dT;
}

RDState ToyHierarchy::reconstruct(const State& s, double delta, double t, const SpectralGrid& fast, double tau,
                                  int taylor_degree) const {
  if (!(delta > 0.0)) throw std::invalid_argument("ToyHierarchy::reconstruct: delta must be positive");
  const double expected = slow_.length() / delta;
  if (std::abs(fast.length() - expected) > 1e-9 * expected || fast.size() < slow_.size())
    throw std::invalid_argument("ToyHierarchy::reconstruct: fast grid incompatible with slow grid");
  Jets J = jets(s);
  const std::size_t ns = static_cast<std::size_t>(slow_.size());
  const int degree = tau == 0.0 ? 0 : taylor_degree;
  auto shifted = [&](char kind, int p, int m) {
    CVec v(ns, 0.0);
    double w = 1.0;
    for (int j = 0; j <= degree; ++j, w *= tau) {
      if (J.is_zero(kind, p, m, j)) continue;
      axpy(v, w, kind == 'F' ? J.F(p, m, j) : J.G(p, m, j));
    }
    return v;
  };
  CVec u_phys(ns, 0.0), v_phys(ns, 0.0);
  // Accumulate harmonics on the slow grid in physical space, then lift.
  Field u_hat = Field::zeros(fast, Space::fourier);
  Field v_hat = Field::zeros(fast, Space::fourier);
  CVec tmp(ns);
  for (const auto& id : included()) {
    const CVec c = shifted(id.kind, id.p, id.m);
    const cplx w = std::pow(delta, id.p) * std::polar(1.0, id.m * spec_.omega0 * t);
    axpy(id.kind == 'F' ? u_phys : v_phys, w, c);
  }
  auto lift = [&](const CVec& phys, Field& out) {
    fft_forward(phys, tmp);
    for (int i = 0; i < slow_.size(); ++i) {
      const int j = slow_.mode(i);
      if (2 * std::abs(j) == slow_.size()) continue;
      out[static_cast<std::size_t>(fast.index(j))] = tmp[static_cast<std::size_t>(i)];
    }
  };
  lift(u_phys, u_hat);
  lift(v_phys, v_hat);
  const Field u1 = u_hat.to_physical();
  const Field v = v_hat.to_physical();
  const std::size_t n = u1.size();
  CVec pr(n), qr(n), vr(n);
  for (std::size_t i = 0; i < n; ++i) {
    pr[i] = u1[i].real();
    qr[i] = u1[i].imag();
    vr[i] = v[i].real();
  }
  return RDState::make({Field(fast, pr), Field(fast, qr)}, Field(fast, vr), t);
}

ResidualSample residuals(const RDModel& model, const ToyHierarchy& h, const ToyHierarchy::State& s, double delta,
                         const SpectralGrid& fast, const ResidualOptions& opt) {
  if (model.d != 2 || !model.complex_pair)
    throw std::invalid_argument("residuals: the expansion is defined for the toy model");
  if (!(opt.fd_step > 0.0) || opt.phases < 1) throw std::invalid_argument("residuals: invalid options");
  const double w0 = h.spec().omega0;
  const double hstep = opt.fd_step;
  static constexpr double kStencil[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
  ResidualSample out;
  const double t0 = s.T / (delta * delta);
  for (int ph = 0; ph < opt.phases; ++ph) {
    const double t = t0 + ph * (2.0 * M_PI / w0) / opt.phases;
    std::vector<RDState> psi;
    for (int j = -2; j <= 2; ++j)
      psi.push_back(h.reconstruct(s, delta, t + j * hstep, fast, delta * delta * j * hstep));
    const RDState& c = psi[2];
    const RhsFields rhs = evaluate_rhs(model, c.u, c.v, false);
    const std::size_t n = c.v.size();
    CVec r1(n), rv(n);
    for (std::size_t i = 0; i < n; ++i) {
      double dp = 0, dq = 0, dv = 0;
      for (int j = 0; j < 5; ++j) {
        dp += kStencil[j] * psi[static_cast<std::size_t>(j)].u[0][i].real();
        dq += kStencil[j] * psi[static_cast<std::size_t>(j)].u[1][i].real();
        dv += kStencil[j] * psi[static_cast<std::size_t>(j)].v[i].real();
      }
      const cplx du(dp / hstep, dq / hstep);
      const cplx f(rhs.du[0][i].real(), rhs.du[1][i].real());
      r1[i] = f - du;
      rv[i] = rhs.dv[i].real() - dv / hstep;
    }
    const Field res1(fast, r1);
    const Field res_s = res1 - mode_filter(res1, opt.delta_tilde);
    out.res1 = std::max(out.res1, sup_norm(res1));
    out.res_s = std::max(out.res_s, sup_norm(res_s));
    out.res_v = std::max(out.res_v, sup_norm(Field(fast, rv)));
  }
  return out;
}

ResidualScaling residual_experiment(const ResidualExperimentConfig& cfg) {
  if (cfg.deltas.size() < 2) throw std::invalid_argument("residual_experiment: need two or more deltas");
  const SpectralGrid slow = slow_grid(cfg.slow_n);
  Field A0 = cfg.A0.size() ? cfg.A0 : Field::from_function(slow, [](double X) {
    return cplx(0.8 + 0.3 * std::cos(X), 0.2 * std::sin(X));
  });
  Field B0 = cfg.B0.size() ? cfg.B0 : Field::from_function(slow, [](double X) { return cplx(0.3 * std::cos(X), 0.0); });
  AnsatzSpec spec{cfg.theta, cfg.omega0, cfg.eps_over_delta};
  ToyHierarchy h(spec, slow);
  ToyHierarchy::State s = h.initial(A0, B0);
  const int steps = static_cast<int>(std::lround(cfg.T_eval / cfg.dT));
  h.advance(s, steps, cfg.dT);
  ResidualScaling out;
  out.deltas = cfg.deltas;
  std::vector<double> r1, rs, rv;
  for (double delta : cfg.deltas) {
    const RDModel model = toy_model(cfg.omega0, cfg.eps_over_delta * delta);
    const ResidualSample r = residuals(model, h, s, delta, fast_grid_for(delta, cfg.slow_n));
    out.samples.push_back(r);
    r1.push_back(r.res1);
    rs.push_back(std::max(r.res_s, 1e-300));
    rv.push_back(r.res_v);
  }
  out.slope1 = fit_loglog_slope(cfg.deltas, r1);
  out.slope_s = fit_loglog_slope(cfg.deltas, rs);
  out.slope_v = fit_loglog_slope(cfg.deltas, rv);
  return out;
}

}  // namespace hopfcl
