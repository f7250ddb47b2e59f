#include "hopfcl/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace hopfcl {

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  PlanPair get(int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    fftw_complex* a = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_complex* b = fftw_alloc_complex(static_cast<std::size_t>(n));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_1d(n, a, b, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_1d(n, a, b, FFTW_BACKWARD, flags);
    fftw_free(a);
    fftw_free(b);
    if (!p.forward || !p.backward) throw std::runtime_error("fftw planning failed");
    plans_.emplace(n, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(fftw_plan plan, std::span<const cplx> in, std::span<cplx> out) {
  if (in.data() == out.data()) {
    CVec tmp(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
  } else {
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }
}

double smooth_step(double y) {
  auto g = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  const double a = g(y);
  const double b = g(1.0 - y);
  return a / (a + b);
}

const Field& fourier_view(const Field& f, Field& storage) {
  if (f.space() == Space::fourier) return f;
  storage = f.to_fourier();
  return storage;
}

}  // namespace

SpectralGrid make_grid(int n_points, double length) {
  if (n_points < 16 || n_points % 2 != 0)
    throw std::invalid_argument("make_grid: n_points must be even and >= 16, got " +
                                std::to_string(n_points));
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("make_grid: length must be positive and finite");
  SpectralGrid g;
  g.n_ = n_points;
  g.length_ = length;
  g.k_.resize(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) g.k_[static_cast<std::size_t>(i)] = 2.0 * M_PI * g.mode(i) / length;
  return g;
}

void fft_forward(std::span<const cplx> in, std::span<cplx> out) {
  const int n = static_cast<int>(in.size());
  execute(plan_cache().get(n).forward, in, out);
  const double scale = 1.0 / n;
  for (auto& c : out) c *= scale;
}

void fft_inverse(std::span<const cplx> in, std::span<cplx> out) {
  const int n = static_cast<int>(in.size());
  execute(plan_cache().get(n).backward, in, out);
}

Field::Field(SpectralGrid grid, CVec values, Space space)
    : grid_(std::move(grid)), values_(std::move(values)), space_(space) {
  if (static_cast<int>(values_.size()) != grid_.size())
    throw std::invalid_argument("Field: value count does not match grid size");
}

Field Field::zeros(const SpectralGrid& grid, Space space) {
  return Field(grid, CVec(static_cast<std::size_t>(grid.size())), space);
}

Field Field::from_function(const SpectralGrid& grid, const std::function<cplx(double)>& f) {
  CVec v(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) v[static_cast<std::size_t>(i)] = f(grid.x(i));
  return Field(grid, std::move(v));
}

Field Field::from_real(const SpectralGrid& grid, std::span<const double> values) {
  CVec v(values.begin(), values.end());
  return Field(grid, std::move(v));
}

Field Field::to_fourier() const {
  if (space_ == Space::fourier) return *this;
  Field out = zeros(grid_, Space::fourier);
  fft_forward(values_, out.values_);
  return out;
}

Field Field::to_physical() const {
  if (space_ == Space::physical) return *this;
  Field out = zeros(grid_, Space::physical);
  fft_inverse(values_, out.values_);
  return out;
}

double Field::imag_residue() const {
  const Field p = to_physical();
  double m = 0.0;
  for (const auto& c : p.values_) m = std::max(m, std::abs(c.imag()));
  return m;
}

double Field::hermitian_defect() const {
  const Field f = to_fourier();
  const int n = grid_.size();
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = (n - i) % n;
    m = std::max(m, std::abs(f.values_[static_cast<std::size_t>(i)] -
                             std::conj(f.values_[static_cast<std::size_t>(j)])));
  }
  return m;
}

Field Field::real_part() const {
  Field p = to_physical();
  for (auto& c : p.values_) c = cplx(c.real(), 0.0);
  return p;
}

void Field::require_compatible(const Field& other) const {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("Field: grid mismatch");
}

Field& Field::operator+=(const Field& other) {
  require_compatible(other);
  const Field o = other.space_ == space_ ? other
                  : (space_ == Space::fourier ? other.to_fourier() : other.to_physical());
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_compatible(other);
  const Field o = other.space_ == space_ ? other
                  : (space_ == Space::fourier ? other.to_fourier() : other.to_physical());
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

Field& Field::operator*=(cplx s) {
  for (auto& c : values_) c *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }

Field derivative(const Field& f, int order) {
  if (order < 0) throw std::invalid_argument("derivative: negative order");
  if (order == 0) return f;
  Field out = f.to_fourier();
  const SpectralGrid& g = f.grid();
  auto v = out.values();
  for (int i = 0; i < g.size(); ++i) {
    const cplx ik(0.0, g.wavenumber(i));
    cplx sym = 1.0;
    for (int p = 0; p < order; ++p) sym *= ik;
    v[static_cast<std::size_t>(i)] *= sym;
  }
  if (order % 2 == 1) v[static_cast<std::size_t>(g.nyquist_index())] = 0.0;
  return f.space() == Space::fourier ? out : out.to_physical();
}

Field antiderivative(const Field& f) {
  Field out = f.to_fourier();
  auto v = out.values();
  double norm = 0.0;
  for (const auto& c : v) norm += std::norm(c);
  norm = std::sqrt(norm);
  if (std::abs(v[0]) > 1e-10 * norm)
    throw std::invalid_argument("antiderivative: field has nonzero mean " +
                                std::to_string(std::abs(v[0])));
  const SpectralGrid& g = f.grid();
  v[0] = 0.0;
  for (int i = 1; i < g.size(); ++i) v[static_cast<std::size_t>(i)] /= cplx(0.0, g.wavenumber(i));
  v[static_cast<std::size_t>(g.nyquist_index())] = 0.0;
  return f.space() == Space::fourier ? out : out.to_physical();
}

Field apply_semigroup(const Field& f, const Symbol& symbol, double t,
                      SemigroupDiagnostics* diagnostics) {
  if (t < 0.0) throw std::invalid_argument("apply_semigroup: negative time");
  Field out = f.to_fourier();
  auto v = out.values();
  SemigroupDiagnostics diag;
  const SpectralGrid& g = f.grid();
  for (int i = 0; i < g.size(); ++i) {
    const cplx lam = symbol(g.wavenumber(i));
    if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag()))
      throw std::invalid_argument("apply_semigroup: symbol not finite at k = " +
                                  std::to_string(g.wavenumber(i)));
    cplx z = lam * t;
    diag.max_exponent = std::max(diag.max_exponent, z.real());
    if (z.real() > kSemigroupExponentCap) {
      z = cplx(kSemigroupExponentCap, z.imag());
      ++diag.capped_modes;
    }
    v[static_cast<std::size_t>(i)] *= std::exp(z);
  }
  if (diagnostics) *diagnostics = diag;
  return f.space() == Space::fourier ? out : out.to_physical();
}

double cutoff_profile(double k, double delta_tilde) {
  return smooth_step((0.55 * delta_tilde - std::abs(k)) / (0.1 * delta_tilde));
}

Field mode_filter(const Field& f, double delta_tilde) {
  if (!(delta_tilde > 0.0)) throw std::invalid_argument("mode_filter: delta_tilde must be positive");
  Field out = f.to_fourier();
  auto v = out.values();
  const SpectralGrid& g = f.grid();
  for (int i = 0; i < g.size(); ++i) v[static_cast<std::size_t>(i)] *= cutoff_profile(g.wavenumber(i), delta_tilde);
  return f.space() == Space::fourier ? out : out.to_physical();
}

double sobolev_norm(const Field& f, double s) {
  if (s < 0.0) throw std::invalid_argument("sobolev_norm: negative order");
  Field storage;
  const Field& fh = fourier_view(f, storage);
  const SpectralGrid& g = f.grid();
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double k = g.wavenumber(i);
    acc += std::pow(1.0 + k * k, s) * std::norm(fh[static_cast<std::size_t>(i)]);
  }
  return std::sqrt(acc * g.length());
}

double l2_norm(const Field& f) { return sobolev_norm(f, 0.0); }

double sup_norm(const Field& f) {
  const Field p = f.to_physical();
  double m = 0.0;
  for (const auto& c : p.values()) m = std::max(m, std::abs(c));
  return m;
}

double mean(const Field& f) {
  if (f.space() == Space::fourier) return f[0].real();
  cplx s = 0.0;
  for (const auto& c : f.values()) s += c;
  return (s / static_cast<double>(f.size())).real();
}

double ul_norm(const Field& f, int s, double window) {
  if (s < 0) throw std::invalid_argument("ul_norm: negative order");
  if (!(window > 0.0)) throw std::invalid_argument("ul_norm: window must be positive");
  const SpectralGrid& g = f.grid();
  const double w = std::min(window, g.length());
  // |d^j f|^2 is evaluated on a doubled grid so that the product is alias free;
  // the window integral is then exact for band-limited f.
  const SpectralGrid g2 = make_grid(2 * g.size(), g.length());
  double total = 0.0;
  for (int j = 0; j <= s; ++j) {
    const Field dj = resample(derivative(f.to_fourier(), j), g2).to_physical();
    Field sq = Field::zeros(g2);
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(dj[i]);
    Field sh = sq.to_fourier();
    auto v = sh.values();
    for (int i = 0; i < g2.size(); ++i) {
      const double k = g2.wavenumber(i);
      if (i == 0) {
        v[0] *= w;
      } else {
        v[static_cast<std::size_t>(i)] *= (std::exp(cplx(0.0, k * w)) - 1.0) / cplx(0.0, k);
      }
    }
    const Field local = sh.to_physical();
    double best = 0.0;
    for (const auto& c : local.values()) best = std::max(best, c.real());
    total += std::sqrt(std::max(best, 0.0));
  }
  return total;
}

Field resample(const Field& f, const SpectralGrid& target) {
  const Field fh = f.to_fourier();
  const SpectralGrid& src = f.grid();
  Field out = Field::zeros(target, Space::fourier);
  const int half = std::min(src.size(), target.size()) / 2;
  for (int j = -half + 1; j < half; ++j) out[static_cast<std::size_t>(target.index(j))] = fh[static_cast<std::size_t>(src.index(j))];
  if (src.size() == target.size()) out[static_cast<std::size_t>(target.index(half))] = fh[static_cast<std::size_t>(src.index(half))];
  return f.space() == Space::fourier ? out : out.to_physical();
}

void dealias(std::span<cplx> c) {
  const int n = static_cast<int>(c.size());
  const int cut = n / 3;
  for (int i = 0; i < n; ++i) {
    const int j = i <= n / 2 ? i : i - n;
    if (std::abs(j) > cut) c[static_cast<std::size_t>(i)] = 0.0;
  }
}

void write_csv(std::ostream& os, const Field& f) {
  const SpectralGrid& g = f.grid();
  os << "# n_points=" << g.size() << " length=" << std::setprecision(17) << g.length()
     << " representation=" << (f.space() == Space::physical ? "physical" : "fourier") << '\n';
  os << (f.space() == Space::physical ? "x" : "k") << ",re,im\n";
  for (int i = 0; i < g.size(); ++i) {
    const double coord = f.space() == Space::physical ? g.x(i) : g.wavenumber(i);
    const cplx c = f[static_cast<std::size_t>(i)];
    os << coord << ',' << c.real() << ',' << c.imag() << '\n';
  }
}

}  // namespace hopfcl
