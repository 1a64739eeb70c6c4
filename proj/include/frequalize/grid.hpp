#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace frequalize {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;

/// Periodic box [0, L)^dim sampled with N points per axis.
///
/// Lattice index i in [0, N) maps to the signed wavenumber k = i for i < N/2
/// and k = i - N otherwise, so k ranges over [-N/2, N/2) and the frequency is
/// xi = 2*pi*k/L. Points are laid out row-major, the last axis fastest.
class TorusGrid {
public:
  TorusGrid(int dim, double box_length, int points_per_axis);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] double box_length() const { return length_; }
  [[nodiscard]] int points_per_axis() const { return points_; }
  [[nodiscard]] std::size_t size() const { return size_; }

  [[nodiscard]] double spacing() const { return length_ / points_; }
  [[nodiscard]] double cell_volume() const;
  [[nodiscard]] double volume() const;
  [[nodiscard]] double xi_min() const;
  /// Per-axis Nyquist magnitude pi*N/L.
  [[nodiscard]] double xi_max() const;

  [[nodiscard]] int wavenumber(int index) const {
    return index < points_ / 2 ? index : index - points_;
  }
  /// Per-axis lattice indices of a flat index (unused axes are 0).
  [[nodiscard]] std::array<int, 3> unflatten(std::size_t flat) const;
  [[nodiscard]] std::size_t flatten(const std::array<int, 3>& idx) const;

  /// Frequency vector at a flat index, zero-padded to 3 components.
  [[nodiscard]] Vec3 frequency(std::size_t flat) const;
  /// Physical coordinate at a flat index, zero-padded to 3 components.
  [[nodiscard]] Vec3 position(std::size_t flat) const;
  /// Flat index of the mode -k (mod N on every axis).
  [[nodiscard]] std::size_t mirror(std::size_t flat) const;
  /// True when some axis sits on the unpaired Nyquist row k = -N/2.
  [[nodiscard]] bool on_nyquist(std::size_t flat) const;

  /// |xi| at every lattice point.
  [[nodiscard]] std::vector<double> frequency_magnitudes() const;

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

private:
  int dim_;
  double length_;
  int points_;
  std::size_t size_;
};

/// Real samples of a (possibly vector-valued) field. Storage is
/// component-major: values[c * grid.size() + i].
struct PhysicalField {
  PhysicalField(TorusGrid grid, int components);

  TorusGrid grid;
  int components;
  std::vector<double> values;

  [[nodiscard]] double* component(int c) { return values.data() + c * grid.size(); }
  [[nodiscard]] const double* component(int c) const {
    return values.data() + c * grid.size();
  }
  [[nodiscard]] double& at(int c, std::size_t i) { return values[c * grid.size() + i]; }
  [[nodiscard]] double at(int c, std::size_t i) const { return values[c * grid.size() + i]; }
};

/// Fourier coefficients on the full frequency lattice, component-major.
struct SpectralField {
  SpectralField(TorusGrid grid, int components);

  TorusGrid grid;
  int components;
  std::vector<Complex> coefficients;

  [[nodiscard]] Complex* component(int c) { return coefficients.data() + c * grid.size(); }
  [[nodiscard]] const Complex* component(int c) const {
    return coefficients.data() + c * grid.size();
  }
  [[nodiscard]] Complex& at(int c, std::size_t i) { return coefficients[c * grid.size() + i]; }
  [[nodiscard]] Complex at(int c, std::size_t i) const {
    return coefficients[c * grid.size() + i];
  }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  /// this += s * o
  SpectralField& add_scaled(double s, const SpectralField& o);
};

/// Continuum-calibrated transform: f_hat(k) = (L/N)^dim sum_j f(x_j) e^{-i xi_k . x_j}.
SpectralField forward_transform(const PhysicalField& f);

/// Inverse of forward_transform. Rejects spectra whose Hermitian defect
/// exceeds 1e-10 of the largest coefficient, naming the worst mode.
PhysicalField inverse_transform(const SpectralField& g);

/// Complex inverse without the symmetry requirement.
std::vector<Complex> inverse_transform_complex(const SpectralField& g, int component);

enum class DerivativeOp { Gradient, Divergence, Curl, Partial };

/// Multiplication by i xi (gradient of a scalar), i xi . (divergence of a
/// 3-vector), i xi x (curl, dim 3 only) or i xi_axis (every component).
/// Odd-order symbols vanish on the Nyquist row of the differentiated axis.
SpectralField spectral_derivative(const SpectralField& g, DerivativeOp op, int axis = 0);

/// Leray projection of a 3-component field onto divergence-free fields; the
/// xi = 0 mode passes through unchanged.
SpectralField solenoidal_projection(const SpectralField& g);

/// Grid-quadrature L^p norm of the pointwise Euclidean magnitude; p = inf
/// (std::numeric_limits<double>::infinity()) gives the max norm.
double lp_norm(const PhysicalField& f, double p);

/// L^2 norm from the Fourier side: sqrt(L^-dim sum_k |f_hat_k|^2).
double spectral_l2_norm(const SpectralField& g);

/// Per-component spatial mean recovered from the xi = 0 coefficient.
std::vector<double> spectral_mean(const SpectralField& g);

}  // namespace frequalize
