#include "hopfcl/linear_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace hopfcl {

namespace {

struct Eig {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
};

Eig eigen(const Eigen::MatrixXcd& M) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, true);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");
  Eig e{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index c = 0; c < e.vectors.cols(); ++c) e.vectors.col(c).normalize();
  return e;
}

// Order at a reference point: Re descending, ties broken by Im descending.
std::vector<Eigen::Index> reference_order(const Eigen::VectorXcd& values) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const cplx la = values(a), lb = values(b);
    if (std::abs(la.real() - lb.real()) > 1e-9) return la.real() > lb.real();
    return la.imag() > lb.imag();
  });
  return idx;
}

void fix_phase_first_component(Eigen::VectorXcd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8) {
      v *= std::conj(v(i)) / std::abs(v(i));
      return;
    }
  }
}

void fix_phase_to(Eigen::VectorXcd& v, const Eigen::VectorXcd& ref) {
  const cplx o = ref.dot(v);
  if (std::abs(o) > 0.0) v *= std::conj(o) / std::abs(o);
}

// Matching that maximises the summed overlap |<prev_j, cand_l>|.
std::vector<Eigen::Index> match(const std::vector<Eigen::VectorXcd>& prev, const Eigen::MatrixXcd& cand,
                                double& worst) {
  const auto d = static_cast<Eigen::Index>(prev.size());
  Eigen::MatrixXd ov(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index l = 0; l < d; ++l) ov(j, l) = std::abs(prev[static_cast<std::size_t>(j)].dot(cand.col(l)));
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Eigen::Index> best = perm;
  if (d <= 7) {
    double best_sum = -1.0;
    do {
      double s = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) s += ov(j, perm[static_cast<std::size_t>(j)]);
      if (s > best_sum) {
        best_sum = s;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<bool> used(static_cast<std::size_t>(d), false);
    for (Eigen::Index j = 0; j < d; ++j) {
      Eigen::Index arg = -1;
      for (Eigen::Index l = 0; l < d; ++l)
        if (!used[static_cast<std::size_t>(l)] && (arg < 0 || ov(j, l) > ov(j, arg))) arg = l;
      used[static_cast<std::size_t>(arg)] = true;
      best[static_cast<std::size_t>(j)] = arg;
    }
  }
  worst = 1.0;
  for (Eigen::Index j = 0; j < d; ++j) worst = std::min(worst, ov(j, best[static_cast<std::size_t>(j)]));
  return best;
}

bool is_defective(const Eigen::MatrixXcd& V) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin <= 1e-10 * s(0);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::string raw_samples(const DecayFit& f) {
  std::ostringstream os;
  os << f.branch << " samples:";
  for (std::size_t i = 0; i < f.t.size(); ++i) os << " (" << f.t[i] << ", " << f.sup_values[i] << ")";
  return os.str();
}

// Critical pair tracked by eigenvector overlap from k = 0 out to each |k|.
class CriticalTracker {
 public:
  explicit CriticalTracker(const ModelLinearization& lin) : lin_(lin) {
    const Eig e0 = eigen(lin.symbol(0.0));
    const auto order = reference_order(e0.values);
    v1_ = e0.vectors.col(order[0]);
    vm1_ = e0.vectors.col(order[1]);
    fix_phase_first_component(v1_);
    fix_phase_first_component(vm1_);
    ref1_ = v1_;
    refm1_ = vm1_;
  }

  CriticalProjections at(double k_abs) {
    if (k_abs < k_) reset();
    const double step = 0.01;
    while (k_ + step < k_abs) advance(k_ + step);
    return finish(k_abs);
  }

 private:
  void reset() {
    k_ = 0.0;
    v1_ = ref1_;
    vm1_ = refm1_;
  }

  void advance(double k) {
    const Eig e = eigen(lin_.symbol(k));
    Eigen::Index a = 0, b = 0;
    pick(e, a, b);
    v1_ = e.vectors.col(a);
    vm1_ = e.vectors.col(b);
    k_ = k;
  }

  void pick(const Eig& e, Eigen::Index& a, Eigen::Index& b) const {
    double oa = -1.0, ob = -1.0;
    for (Eigen::Index c = 0; c < e.vectors.cols(); ++c) {
      const double x = std::abs(v1_.dot(e.vectors.col(c)));
      const double y = std::abs(vm1_.dot(e.vectors.col(c)));
      if (x > oa) {
        oa = x;
        a = c;
      }
      if (y > ob) {
        ob = y;
        b = c;
      }
    }
    if (a == b) throw std::runtime_error("critical eigenvectors merged during continuation");
  }

  CriticalProjections finish(double k) {
    const Eig e = eigen(lin_.symbol(k));
    Eigen::Index a = 0, b = 0;
    pick(e, a, b);
    CriticalProjections P;
    P.eigenvalues = e.values;
    P.eigenvectors = e.vectors;
    P.i1 = static_cast<std::size_t>(a);
    P.im1 = static_cast<std::size_t>(b);
    P.lambda1 = e.values(a);
    P.lambdam1 = e.values(b);
    double sep = std::abs(P.lambda1 - P.lambdam1);
    for (Eigen::Index c = 0; c < e.values.size(); ++c) {
      if (c == a || c == b) continue;
      sep = std::min(sep, std::abs(P.lambda1 - e.values(c)));
      sep = std::min(sep, std::abs(P.lambdam1 - e.values(c)));
    }
    P.separation = sep;
    if (sep < kSeparationTol) {
      std::ostringstream os;
      os << "spectral_projections: critical eigenvalues not separated at k = " << k
         << " (margin " << sep << ", tolerance " << kSeparationTol << ")";
      throw std::runtime_error(os.str());
    }
    Eigen::VectorXcd U1 = e.vectors.col(a);
    Eigen::VectorXcd Um1 = e.vectors.col(b);
    fix_phase_to(U1, ref1_);
    fix_phase_to(Um1, refm1_);
    Eigen::MatrixXcd V = e.vectors;
    V.col(a) = U1;
    V.col(b) = Um1;
    const Eigen::MatrixXcd W = V.inverse();
    P.U1 = U1;
    P.Um1 = Um1;
    P.p1 = W.row(a);
    P.pm1 = W.row(b);
    P.P1 = U1 * P.p1;
    P.Pm1 = Um1 * P.pm1;
    P.eigenvectors = V;
    v1_ = U1;
    vm1_ = Um1;
    k_ = k;
    return P;
  }

  const ModelLinearization& lin_;
  Eigen::VectorXcd v1_, vm1_, ref1_, refm1_;
  double k_ = 0.0;
};

}  // namespace

Eigen::MatrixXcd ModelLinearization::symbol(double k) const {
  Eigen::MatrixXcd M = jacobian;
  for (int i = 0; i < d; ++i) M(i, i) -= diffusion[static_cast<std::size_t>(i)] * k * k;
  return M;
}

void ModelLinearization::validate() const {
  if (d < 2) throw std::invalid_argument("ModelLinearization: d must be >= 2");
  if (static_cast<int>(diffusion.size()) != d) throw std::invalid_argument("ModelLinearization: diffusion size");
  for (double D : diffusion)
    if (!(D > 0.0)) throw std::invalid_argument("ModelLinearization: diffusion must be positive");
  if (!(d_v > 0.0)) throw std::invalid_argument("ModelLinearization: d_v must be positive");
  if (jacobian.rows() != d || jacobian.cols() != d) throw std::invalid_argument("ModelLinearization: jacobian shape");
}

std::vector<double> symmetric_samples(double k_max, int half_count) {
  std::vector<double> ks;
  ks.reserve(static_cast<std::size_t>(2 * half_count + 1));
  for (int i = -half_count; i <= half_count; ++i) ks.push_back(k_max * i / half_count);
  return ks;
}

DispersionData dispersion_curves(const ModelLinearization& lin, const std::vector<double>& k_samples) {
  lin.validate();
  if (k_samples.empty()) throw std::invalid_argument("dispersion_curves: no samples");
  for (std::size_t i = 0; i < k_samples.size(); ++i) {
    if (!std::isfinite(k_samples[i])) throw std::invalid_argument("dispersion_curves: non-finite sample");
    if (i > 0 && k_samples[i] < k_samples[i - 1]) throw std::invalid_argument("dispersion_curves: samples not sorted");
  }
  const int d = lin.d;
  const std::size_t n = k_samples.size();
  DispersionData out;
  out.k_samples = k_samples;
  out.parameter = lin.parameter;
  out.d = d;
  out.curves.assign(static_cast<std::size_t>(d + 1), std::vector<cplx>(n));
  out.eigenvectors.assign(static_cast<std::size_t>(d + 1), std::vector<Eigen::VectorXcd>(n));
  out.defective.assign(n, false);

  for (std::size_t i = 0; i < n; ++i) {
    const double k = k_samples[i];
    out.curves[0][i] = cplx(-lin.d_v * k * k, 0.0);
    out.eigenvectors[0][i] = Eigen::VectorXcd::Ones(1);
  }

  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(k_samples[i]) < std::abs(k_samples[i0])) i0 = i;

  std::vector<Eig> eig(n);
  for (std::size_t i = 0; i < n; ++i) {
    eig[i] = eigen(lin.symbol(k_samples[i]));
    out.defective[i] = is_defective(eig[i].vectors);
  }

  auto assign = [&](std::size_t i, const std::vector<Eigen::Index>& perm,
                    const std::vector<Eigen::VectorXcd>* prev) {
    for (int j = 0; j < d; ++j) {
      const auto col = perm[static_cast<std::size_t>(j)];
      Eigen::VectorXcd v = eig[i].vectors.col(col);
      if (prev)
        fix_phase_to(v, (*prev)[static_cast<std::size_t>(j)]);
      else
        fix_phase_first_component(v);
      out.curves[static_cast<std::size_t>(j + 1)][i] = eig[i].values(col);
      out.eigenvectors[static_cast<std::size_t>(j + 1)][i] = v;
    }
  };

  assign(i0, reference_order(eig[i0].values), nullptr);

  auto current = [&](std::size_t i) {
    std::vector<Eigen::VectorXcd> vs;
    for (int j = 0; j < d; ++j) vs.push_back(out.eigenvectors[static_cast<std::size_t>(j + 1)][i]);
    return vs;
  };

  auto walk = [&](std::size_t from, std::size_t to) {
    const auto prev = current(from);
    double worst = 1.0;
    const auto perm = match(prev, eig[to].vectors, worst);
    out.min_overlap = std::min(out.min_overlap, worst);
    if (worst < 0.5) out.continuation_failures.push_back(to);
    assign(to, perm, &prev);
  };

  for (std::size_t i = i0 + 1; i < n; ++i) walk(i - 1, i);
  for (std::size_t i = i0; i-- > 0;) walk(i + 1, i);
  return out;
}

SpecReport check_spec(const DispersionData& data, const std::vector<DispersionData>& parameter_sweep) {
  const auto& k = data.k_samples;
  std::size_t i0 = k.size();
  for (std::size_t i = 0; i < k.size(); ++i)
    if (std::abs(k[i]) < 1e-14) i0 = i;
  if (i0 == k.size() || i0 < 2 || i0 + 2 >= k.size())
    throw std::invalid_argument("check_spec: need samples at k = 0 and two neighbours on each side");
  const double h = k[i0 + 1] - k[i0];
  if (h > 1e-3 * (1.0 + 1e-9) || h <= 0.0)
    throw std::invalid_argument("check_spec: sample spacing near k = 0 exceeds 1e-3");
  for (int s = -2; s <= 2; ++s) {
    const double expect = s * h;
    if (std::abs(k[static_cast<std::size_t>(static_cast<long>(i0) + s)] - expect) > 1e-9 * h)
      throw std::invalid_argument("check_spec: samples near k = 0 are not uniform");
  }
  const auto& l1 = data.curves[1];
  const auto& l2 = data.curves[2];
  auto at = [&](const std::vector<cplx>& c, int s) { return c[static_cast<std::size_t>(static_cast<long>(i0) + s)]; };

  SpecReport r;
  r.re_lambda_at_0 = at(l1, 0).real();
  r.omega0 = at(l1, 0).imag();
  const cplx d1 = (at(l1, -2) - 8.0 * at(l1, -1) + 8.0 * at(l1, 1) - at(l1, 2)) / (12.0 * h);
  const cplx d2 = (-at(l1, -2) + 16.0 * at(l1, -1) - 30.0 * at(l1, 0) + 16.0 * at(l1, 1) - at(l1, 2)) / (12.0 * h * h);
  r.slope_at_0 = std::abs(d1);
  r.curvature_at_0 = d2.real();
  r.other_max_re = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 3; j < data.curves.size(); ++j) r.other_max_re = std::max(r.other_max_re, at(data.curves[j], 0).real());

  r.critical = std::abs(r.re_lambda_at_0) < kCriticalityTol;
  r.flat = r.slope_at_0 < kSlopeTol;
  r.concave = r.curvature_at_0 < -kCurvatureTol;
  r.oscillatory = r.omega0 > kCriticalityTol && std::abs(at(l2, 0).imag() + r.omega0) < kCriticalityTol &&
                  std::abs(at(l2, 0).real() - r.re_lambda_at_0) < kCriticalityTol;
  r.others_stable = r.other_max_re < 0.0;

  std::vector<double> p{data.parameter}, re{r.re_lambda_at_0};
  for (const auto& s : parameter_sweep) {
    std::size_t j0 = s.k_samples.size();
    for (std::size_t i = 0; i < s.k_samples.size(); ++i)
      if (std::abs(s.k_samples[i]) < 1e-14) j0 = i;
    if (j0 == s.k_samples.size()) throw std::invalid_argument("check_spec: sweep entry lacks k = 0");
    p.push_back(s.parameter);
    re.push_back(s.curves[1][j0].real());
  }
  const bool distinct = std::any_of(p.begin(), p.end(), [&](double x) { return x != p.front(); });
  r.parameter_derivative = distinct ? fit_slope(p, re) : std::numeric_limits<double>::quiet_NaN();
  r.transversal = distinct && r.parameter_derivative > 0.0;
  return r;
}

Eigen::VectorXcd critical_eigenvector(const ModelLinearization& lin) {
  const Eig e = eigen(lin.symbol(0.0));
  Eigen::VectorXcd v = e.vectors.col(reference_order(e.values)[0]);
  fix_phase_first_component(v);
  return v;
}

double critical_frequency(const ModelLinearization& lin) {
  const Eig e = eigen(lin.symbol(0.0));
  return e.values(reference_order(e.values)[0]).imag();
}

CriticalProjections spectral_projections(const ModelLinearization& lin, double k) {
  lin.validate();
  CriticalTracker tracker(lin);
  return tracker.at(std::abs(k));
}

ModeSplit mode_split(const std::vector<Field>& u, const ModelLinearization& lin, double delta_tilde) {
  lin.validate();
  if (static_cast<int>(u.size()) != lin.d) throw std::invalid_argument("mode_split: component count");
  const SpectralGrid& g = u.front().grid();
  for (const auto& f : u)
    if (!(f.grid() == g)) throw std::invalid_argument("mode_split: grid mismatch");
  std::vector<Field> uh;
  for (const auto& f : u) uh.push_back(f.to_fourier());

  ModeSplit out{Field::zeros(g, Space::fourier), Field::zeros(g, Space::fourier), uh};

  std::vector<int> active;
  for (int i = 0; i < g.size(); ++i)
    if (cutoff_profile(g.wavenumber(i), delta_tilde) > 0.0) active.push_back(i);
  std::sort(active.begin(), active.end(), [&](int a, int b) {
    return std::abs(g.wavenumber(a)) < std::abs(g.wavenumber(b));
  });

  CriticalTracker tracker(lin);
  for (int i : active) {
    const double k = g.wavenumber(i);
    const double chi = cutoff_profile(k, delta_tilde);
    const CriticalProjections P = tracker.at(std::abs(k));
    const auto idx = static_cast<std::size_t>(i);
    Eigen::VectorXcd x(lin.d);
    for (int c = 0; c < lin.d; ++c) x(c) = uh[static_cast<std::size_t>(c)][idx];
    const cplx c1 = chi * (P.p1 * x)(0);
    const cplx cm1 = chi * (P.pm1 * x)(0);
    out.c1[idx] = c1;
    out.cm1[idx] = cm1;
    for (int c = 0; c < lin.d; ++c)
      out.us[static_cast<std::size_t>(c)][idx] = x(c) - c1 * P.U1(c) - cm1 * P.Um1(c);
  }
  out.c1 = out.c1.to_physical();
  out.cm1 = out.cm1.to_physical();
  for (auto& f : out.us) f = f.to_physical();
  return out;
}

std::vector<Field> mode_combine(const ModeSplit& split, const ModelLinearization& lin) {
  const SpectralGrid& g = split.c1.grid();
  const Field c1 = split.c1.to_fourier();
  const Field cm1 = split.cm1.to_fourier();
  std::vector<Field> out;
  for (const auto& f : split.us) out.push_back(f.to_fourier());
  std::vector<int> order(static_cast<std::size_t>(g.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(g.wavenumber(a)) < std::abs(g.wavenumber(b));
  });
  CriticalTracker tracker(lin);
  for (int i : order) {
    const auto idx = static_cast<std::size_t>(i);
    if (c1[idx] == cplx(0.0) && cm1[idx] == cplx(0.0)) continue;
    const CriticalProjections P = tracker.at(std::abs(g.wavenumber(i)));
    for (int c = 0; c < lin.d; ++c) out[static_cast<std::size_t>(c)][idx] += c1[idx] * P.U1(c) + cm1[idx] * P.Um1(c);
  }
  for (auto& f : out) f = f.to_physical();
  return out;
}

double projection_radius(const ModelLinearization& lin, double k_max, double dk) {
  CriticalTracker tracker(lin);
  for (double k = 0.0; k <= k_max; k += dk) {
    CriticalProjections P;
    try {
      P = tracker.at(k);
    } catch (const std::runtime_error&) {
      return 0.5 * k;
    }
    if (P.separation < 1e-3) return 0.5 * k;
  }
  return k_max;
}

ResonanceReport nonresonance_margin(const ModelLinearization& lin, double radius, int samples) {
  if (samples < 2) samples = 2;
  std::vector<double> grid(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) grid[static_cast<std::size_t>(i)] = -radius + 2.0 * radius * i / (samples - 1);
  std::vector<double> needed;
  for (double k : grid)
    for (double m : grid) {
      needed.push_back(std::abs(k));
      needed.push_back(std::abs(m));
      needed.push_back(std::abs(k - m));
    }
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               needed.end());
  CriticalTracker tracker(lin);
  std::vector<std::pair<cplx, cplx>> lam;
  for (double k : needed) {
    const auto P = tracker.at(k);
    lam.emplace_back(P.lambda1, P.lambdam1);
  }
  auto lookup = [&](double k, int j) {
    const double a = std::abs(k);
    auto it = std::lower_bound(needed.begin(), needed.end(), a - 1e-14);
    const auto& p = lam[static_cast<std::size_t>(it - needed.begin())];
    return j > 0 ? p.first : p.second;
  };
  ResonanceReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  for (double k : grid)
    for (double m : grid)
      for (int j1 : {1, -1})
        for (int j2 : {1, -1})
          for (int j3 : {1, -1}) {
            const double val = std::abs(lookup(k, j1) - lookup(k - m, j2) - lookup(m, j3));
            if (val < rep.margin) {
              rep.margin = val;
              rep.k_at = k;
              rep.m_at = m;
              rep.triple = {j1, j2, j3};
            }
          }
  return rep;
}

double weighted_symbol_sup(const std::vector<double>& k, const std::vector<cplx>& lambda, double t, double r,
                           double k_min_abs) {
  double best = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (std::abs(k[i]) < k_min_abs) continue;
    const double v = std::exp(lambda[i].real() * t) * std::pow(1.0 + k[i] * k[i], 0.5 * r);
    best = std::max(best, v);
  }
  return best;
}

DecayReport semigroup_decay_check(const DispersionData& data, double s, double r,
                                  const std::vector<double>& t_samples, double delta_tilde) {
  if (t_samples.empty()) throw std::invalid_argument("semigroup_decay_check: no time samples");
  for (double t : t_samples)
    if (!(t > 0.0)) throw std::invalid_argument("semigroup_decay_check: time samples must be positive");
  (void)s;
  auto singular = [&](double t) { return 1.0 + (r > 0.0 ? std::pow(t, -0.5 * r) : 0.0); };
  const auto& k = data.k_samples;

  DecayReport rep;

  rep.critical.branch = "critical";
  double mu = 0.0;
  for (int j : {1, 2})
    for (const auto& l : data.curves[static_cast<std::size_t>(j)]) mu = std::max(mu, l.real());
  rep.critical.growth = mu;
  for (double t : t_samples) {
    const double v = std::max(weighted_symbol_sup(k, data.curves[1], t, r), weighted_symbol_sup(k, data.curves[2], t, r));
    rep.critical.t.push_back(t);
    rep.critical.sup_values.push_back(v);
    rep.critical.C = std::max(rep.critical.C, v / (singular(t) * std::exp(mu * t)));
  }

  DecayFit st;
  st.branch = "stable";
  const double k_cut = 0.55 * delta_tilde;
  bool any = false;
  for (double t : t_samples) {
    double v = 0.0;
    for (std::size_t j = 1; j < data.curves.size(); ++j) {
      const double kmin = j <= 2 ? k_cut : 0.0;
      for (std::size_t i = 0; i < k.size(); ++i)
        if (std::abs(k[i]) >= kmin) any = true;
      v = std::max(v, weighted_symbol_sup(k, data.curves[j], t, r, kmin));
    }
    st.t.push_back(t);
    st.sup_values.push_back(v);
  }
  if (any) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < st.t.size(); ++i)
      if (st.t[i] >= 1.0 && st.sup_values[i] > 0.0) {
        x.push_back(st.t[i]);
        y.push_back(std::log(st.sup_values[i]));
      }
    if (x.size() < 2) {
      x.clear();
      y.clear();
      for (std::size_t i = 0; i < st.t.size(); ++i)
        if (st.sup_values[i] > 0.0) {
          x.push_back(st.t[i]);
          y.push_back(std::log(st.sup_values[i]));
        }
    }
    if (x.size() < 2) throw std::runtime_error("semigroup_decay_check: stable fit needs two samples; " + raw_samples(st));
    st.sigma = -fit_slope(x, y);
    if (!(st.sigma > 0.0) || !std::isfinite(st.sigma))
      throw std::runtime_error("semigroup_decay_check: stable branch does not decay; " + raw_samples(st));
    for (std::size_t i = 0; i < st.t.size(); ++i)
      st.C = std::max(st.C, st.sup_values[i] * std::exp(st.sigma * st.t[i]) / singular(st.t[i]));
    rep.stable = st;
  }

  rep.conservation.branch = "conservation";
  for (double t : t_samples) {
    const double v = weighted_symbol_sup(k, data.curves[0], t, r);
    rep.conservation.t.push_back(t);
    rep.conservation.sup_values.push_back(v);
    rep.conservation.C = std::max(rep.conservation.C, v / singular(t));
  }
  return rep;
}

void write_dispersion_csv(std::ostream& os, const DispersionData& data) {
  os << "k,j,re_lambda,im_lambda\n";
  os.precision(17);
  for (std::size_t j = 0; j < data.curves.size(); ++j)
    for (std::size_t i = 0; i < data.k_samples.size(); ++i)
      os << data.k_samples[i] << ',' << j << ',' << data.curves[j][i].real() << ',' << data.curves[j][i].imag() << '\n';
}

}  // namespace hopfcl
