#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hopfcl/approximation.hpp"

namespace hopfcl {

int ansatz_exponent(AnsatzVariable var, int m) {
  static constexpr int c1[7] = {3, 2, 3, 2, 1, 2, 3};
  static constexpr int s[7] = {3, 2, 3, 2, 3, 2, 3};
  static constexpr int v[7] = {5, 4, 5, 2, 5, 4, 5};
  const int a = std::abs(m);
  switch (var) {
    case AnsatzVariable::c1:
      return a > 3 ? a : c1[m + 3];
    case AnsatzVariable::cm1:
      return a > 3 ? a : c1[-m + 3];
    case AnsatzVariable::us:
      return a > 3 ? a : s[m + 3];
    case AnsatzVariable::v:
      return a > 3 ? a + 2 : v[m + 3];
  }
  throw std::invalid_argument("ansatz_exponent: unknown variable");
}

std::vector<int> AnsatzSpec::harmonics() const {
  std::vector<int> h(static_cast<std::size_t>(2 * (theta + 1) + 1));
  std::iota(h.begin(), h.end(), -(theta + 1));
  return h;
}

void AnsatzSpec::validate() const {
  if (theta < 1 || theta > kMaxTheta)
    throw std::invalid_argument("AnsatzSpec: theta must lie in [1, " + std::to_string(kMaxTheta) + "]");
  if (!(omega0 > 0.0)) throw std::invalid_argument("AnsatzSpec: omega0 must be positive");
  if (!std::isfinite(kappa)) throw std::invalid_argument("AnsatzSpec: kappa must be finite");
}

SpectralGrid fast_grid_for(double delta, int slow_n) {
  if (!(delta > 0.0)) throw std::invalid_argument("fast_grid_for: delta must be positive");
  if (slow_n < 16 || slow_n % 2) throw std::invalid_argument("fast_grid_for: slow grid size must be even and >= 16");
  const int wanted = std::max(128, static_cast<int>(std::ceil(24.0 / delta)));
  const int n = ((wanted + slow_n - 1) / slow_n) * slow_n;
  return make_grid(n, 2.0 * M_PI / delta);
}

namespace {

void require_slow_fast(const SpectralGrid& slow, const SpectralGrid& fast, double delta) {
  const double expected = slow.length() / delta;
  if (std::abs(fast.length() - expected) > 1e-9 * expected)
    throw std::invalid_argument("ansatz: fast grid length must equal slow length / delta");
  if (fast.size() < slow.size()) throw std::invalid_argument("ansatz: fast grid coarser than slow grid");
  if (fast.size() % slow.size() != 0)
    throw std::invalid_argument("ansatz: fast grid size must be a multiple of the slow grid size");
}

// Slow field evaluated at X = delta x on the fast grid.
Field to_fast(const Field& slow, const SpectralGrid& fast) {
  const Field h = slow.to_fourier();
  Field out = Field::zeros(fast, Space::fourier);
  const SpectralGrid& g = slow.grid();
  for (int i = 0; i < g.size(); ++i) {
    const int j = g.mode(i);
    if (2 * std::abs(j) == g.size()) continue;
    out[static_cast<std::size_t>(fast.index(j))] = h[static_cast<std::size_t>(i)];
  }
  return out;
}

Field from_fast(const Field& fast, const SpectralGrid& slow) {
  const Field h = fast.to_fourier();
  Field out = Field::zeros(slow, Space::fourier);
  const SpectralGrid& g = fast.grid();
  for (int i = 0; i < slow.size(); ++i) {
    const int j = slow.mode(i);
    if (2 * std::abs(j) == slow.size()) continue;
    out[static_cast<std::size_t>(i)] = h[static_cast<std::size_t>(g.index(j))];
  }
  return out.to_physical();
}

}  // namespace

RDState first_order_ansatz(const Field& A1, const Field& B0, double delta, double t, double omega0,
                           const Eigen::VectorXcd& U, const SpectralGrid& fast) {
  if (!(delta > 0.0)) throw std::invalid_argument("first_order_ansatz: delta must be positive");
  if (!(A1.grid() == B0.grid())) throw std::invalid_argument("first_order_ansatz: A and B grids differ");
  require_slow_fast(A1.grid(), fast, delta);
  const Field a = to_fast(A1, fast).to_physical();
  const Field b = to_fast(B0, fast).to_physical();
  const cplx phase = std::polar(1.0, omega0 * t);
  std::vector<Field> u;
  for (int c = 0; c < U.size(); ++c) {
    CVec vals(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) vals[i] = 2.0 * (delta * a[i] * phase * U(c)).real();
    u.emplace_back(fast, std::move(vals));
  }
  CVec vv(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) vv[i] = delta * delta * b[i].real();
  return RDState::make(std::move(u), Field(fast, std::move(vv)), t);
}

HarmonicFields eliminate_harmonics_toy(const Field& A1, double omega0) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("eliminate_harmonics_toy: omega0 must be positive");
  const Field a = A1.to_physical();
  const cplx iw(0.0, omega0);
  CVec a10(a.size()), a12(a.size()), a1m2(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx A = a[i];
    a10[i] = -std::norm(A) / iw;
    a12[i] = A * A / iw;
    a1m2[i] = -std::conj(A) * std::conj(A) / (3.0 * iw);
  }
  return {Field(a.grid(), a10), Field(a.grid(), a12), Field(a.grid(), a1m2)};
}

ExtractedAmplitudes extract_amplitudes(const RDState& state, const ModelLinearization& lin, double delta,
                                       double delta_tilde, const Eigen::VectorXcd& U, const SpectralGrid& slow,
                                       double omega0) {
  if (!(delta > 0.0)) throw std::invalid_argument("extract_amplitudes: delta must be positive");
  require_slow_fast(slow, state.grid(), delta);
  const ModeSplit split = mode_split(state.u, lin, delta_tilde);
  const Eigen::VectorXcd U0 = critical_eigenvector(lin);
  const cplx s = U0.dot(U);
  if (std::abs(s) < 1e-12) throw std::invalid_argument("extract_amplitudes: ansatz vector orthogonal to U_1(0)");
  const cplx demod = std::polar(1.0, -omega0 * state.t) / (delta * s);
  Field c1 = split.c1;
  c1 *= demod;
  Field vf = mode_filter(state.v, delta_tilde);
  vf *= 1.0 / (delta * delta);
  return {from_fast(c1, slow), from_fast(vf, slow).real_part()};
}

namespace {

double component_norm(const RDState& a, const RDState* b, double delta, int n, bool ul) {
  double s = 0.0;
  auto norm = [&](const Field& f, int order) {
    return ul ? ul_norm(f, order) : sobolev_norm(f, order);
  };
  for (std::size_t c = 0; c < a.u.size(); ++c) {
    const Field e = b ? a.u[c] - b->u[c] : a.u[c];
    const double x = norm(e, n + 1);
    s += x * x;
  }
  Field ev = b ? a.v - b->v : a.v;
  ev *= 1.0 / delta;
  const double x = norm(ev, n);
  return std::sqrt(s + x * x);
}

}  // namespace

double scaled_error_norm(const RDState& a, const RDState& b, double delta, int n) {
  if (a.u.size() != b.u.size() || !(a.grid() == b.grid()))
    throw std::invalid_argument("scaled_error_norm: incompatible states");
  return component_norm(a, &b, delta, n, false);
}

double scaled_state_norm(const RDState& a, double delta, int n) { return component_norm(a, nullptr, delta, n, false); }

double scaled_state_norm_ul(const RDState& a, double delta, int n) {
  return component_norm(a, nullptr, delta, n, true);
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) throw std::invalid_argument("fit_loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

Field random_band_field(const SpectralGrid& grid, double k_band, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Field h = Field::zeros(grid, Space::fourier);
  for (int j = 0; 2 * j < grid.size(); ++j) {
    const double k = j * grid.dk();
    if (k > k_band) break;
    const cplx z(normal(rng), j == 0 ? 0.0 : normal(rng));
    h[static_cast<std::size_t>(grid.index(j))] = z;
    if (j > 0) h[static_cast<std::size_t>(grid.index(-j))] = std::conj(z);
  }
  return h.to_physical().real_part();
}

}  // namespace hopfcl
