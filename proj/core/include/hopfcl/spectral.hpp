#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hopfcl {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// Periodic grid on [0, length) with n_points equispaced nodes.
//
// Fourier storage follows the FFT ordering: index i holds mode j = i for
// i <= n/2 and j = i - n otherwise, so the Nyquist mode carries j = +n/2.
class SpectralGrid {
 public:
  SpectralGrid() = default;

  int size() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / n_; }
  double x(int i) const { return i * dx(); }

  // Signed mode number of FFT index i.
  int mode(int i) const { return i <= n_ / 2 ? i : i - n_; }
  // FFT index of signed mode j, j in (-n/2, n/2].
  int index(int j) const { return j >= 0 ? j : j + n_; }
  double wavenumber(int i) const { return k_[static_cast<std::size_t>(i)]; }
  std::span<const double> wavenumbers() const { return k_; }
  // Smallest nonzero |k|.
  double dk() const { return 2.0 * M_PI / length_; }
  int nyquist_index() const { return n_ / 2; }

  bool operator==(const SpectralGrid& other) const {
    return n_ == other.n_ && length_ == other.length_;
  }

  friend SpectralGrid make_grid(int n_points, double length);

 private:
  int n_ = 0;
  double length_ = 0.0;
  std::vector<double> k_;
};

SpectralGrid make_grid(int n_points, double length);

enum class Space { physical, fourier };

// Complex-valued grid function with an explicit representation flag.
// Fourier coefficients are normalised so that f(x_i) = sum_j fhat_j e^{i k_j x_i}.
class Field {
 public:
  Field() = default;
  Field(SpectralGrid grid, CVec values, Space space = Space::physical);

  static Field zeros(const SpectralGrid& grid, Space space = Space::physical);
  static Field from_function(const SpectralGrid& grid, const std::function<cplx(double)>& f);
  static Field from_real(const SpectralGrid& grid, std::span<const double> values);

  const SpectralGrid& grid() const { return grid_; }
  Space space() const { return space_; }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  Field to_fourier() const;
  Field to_physical() const;

  // Largest |Im| of the physical values.
  double imag_residue() const;
  // Largest violation of fhat(-k) = conj(fhat(k)).
  double hermitian_defect() const;
  Field real_part() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx s);

 private:
  void require_compatible(const Field& other) const;

  SpectralGrid grid_;
  CVec values_;
  Space space_ = Space::physical;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);

// In-place transforms on raw coefficient arrays sharing the Field normalisation.
void fft_forward(std::span<const cplx> in, std::span<cplx> out);
void fft_inverse(std::span<const cplx> in, std::span<cplx> out);

Field derivative(const Field& f, int order);
Field antiderivative(const Field& f);

using Symbol = std::function<cplx(double)>;

struct SemigroupDiagnostics {
  std::size_t capped_modes = 0;
  double max_exponent = 0.0;
};

inline constexpr double kSemigroupExponentCap = 50.0;

Field apply_semigroup(const Field& f, const Symbol& symbol, double t,
                      SemigroupDiagnostics* diagnostics = nullptr);

double cutoff_profile(double k, double delta_tilde);
Field mode_filter(const Field& f, double delta_tilde);

double sobolev_norm(const Field& f, double s);
double sup_norm(const Field& f);
double l2_norm(const Field& f);
// sum_{j<=s} sup_x ( int_x^{x+w} |d^j f|^2 )^{1/2}, the periodic stand-in for H^s_{l,u}.
double ul_norm(const Field& f, int s, double window = 1.0);
double mean(const Field& f);

// Zero-padding / truncation between grids; coefficients keep their mode number.
Field resample(const Field& f, const SpectralGrid& target);

// Mask that keeps |j| <= n/3.
void dealias(std::span<cplx> fourier_coeffs);

void write_csv(std::ostream& os, const Field& f);

}  // namespace hopfcl
