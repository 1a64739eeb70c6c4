#include "frequalize/grid.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "frequalize/error.hpp"
#include "frequalize/parallel.hpp"

namespace frequalize {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread-safe; execution with fftw_execute_dft is.
fftw_plan cached_plan(int dim, int n, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(dim, n, sign);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(n);
  std::vector<Complex> scratch(total);
  std::array<int, 3> dims{n, n, n};
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan =
      fftw_plan_dft(dim, dims.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan == nullptr) throw NumericalError("FFTW failed to create a plan");
  plans.emplace(key, plan);
  return plan;
}

void execute(const TorusGrid& grid, Complex* data, int sign) {
  fftw_plan plan = cached_plan(grid.dim(), grid.points_per_axis(), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, buf, buf);
}

void require_same_grid(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid == b.grid) || a.components != b.components)
    throw InputError("spectral fields live on different grids or component counts");
}

}  // namespace

// ---------------------------------------------------------------------------
// TorusGrid

TorusGrid::TorusGrid(int dim, double box_length, int points_per_axis)
    : dim_(dim), length_(box_length), points_(points_per_axis), size_(1) {
  if (dim < 1 || dim > 3) throw InputError(fmt::format("grid dim must be 1, 2 or 3 (got {})", dim));
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw InputError(fmt::format("box_length must be positive (got {})", box_length));
  if (points_per_axis < 8 || points_per_axis % 2 != 0)
    throw InputError(
        fmt::format("points_per_axis must be an even integer >= 8 (got {})", points_per_axis));
  for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(points_per_axis);
}

double TorusGrid::cell_volume() const { return std::pow(spacing(), dim_); }
double TorusGrid::volume() const { return std::pow(length_, dim_); }
double TorusGrid::xi_min() const { return kTwoPi / length_; }
double TorusGrid::xi_max() const { return std::numbers::pi * points_ / length_; }

std::array<int, 3> TorusGrid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return idx;
}

std::size_t TorusGrid::flatten(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim_; ++d) flat = flat * points_ + static_cast<std::size_t>(idx[d]);
  return flat;
}

Vec3 TorusGrid::frequency(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Vec3 xi{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) xi[d] = kTwoPi * wavenumber(idx[d]) / length_;
  return xi;
}

Vec3 TorusGrid::position(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Vec3 x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) x[d] = idx[d] * spacing();
  return x;
}

std::size_t TorusGrid::mirror(std::size_t flat) const {
  auto idx = unflatten(flat);
  for (int d = 0; d < dim_; ++d) idx[d] = (points_ - idx[d]) % points_;
  return flatten(idx);
}

bool TorusGrid::on_nyquist(std::size_t flat) const {
  const auto idx = unflatten(flat);
  for (int d = 0; d < dim_; ++d)
    if (idx[d] == points_ / 2) return true;
  return false;
}

std::vector<double> TorusGrid::frequency_magnitudes() const {
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const Vec3 xi = frequency(i);
    out[i] = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fields

PhysicalField::PhysicalField(TorusGrid g, int comps)
    : grid(g), components(comps), values(static_cast<std::size_t>(comps) * g.size(), 0.0) {
  if (comps < 1) throw InputError("a field needs at least one component");
}

SpectralField::SpectralField(TorusGrid g, int comps)
    : grid(g), components(comps), coefficients(static_cast<std::size_t>(comps) * g.size()) {
  if (comps < 1) throw InputError("a field needs at least one component");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < coefficients.size(); ++i) coefficients[i] += o.coefficients[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < coefficients.size(); ++i) coefficients[i] -= o.coefficients[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coefficients) c *= s;
  return *this;
}

SpectralField& SpectralField::add_scaled(double s, const SpectralField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < coefficients.size(); ++i) coefficients[i] += s * o.coefficients[i];
  return *this;
}

// ---------------------------------------------------------------------------
// Transforms

SpectralField forward_transform(const PhysicalField& f) {
  const std::size_t n = f.grid.size();
  for (int c = 0; c < f.components; ++c) {
    const double* v = f.component(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(v[i])) {
        const auto idx = f.grid.unflatten(i);
        throw NumericalError(fmt::format(
            "forward_transform: non-finite sample in component {} at lattice point ({}, {}, {})",
            c, idx[0], idx[1], idx[2]));
      }
    }
  }
  SpectralField out(f.grid, f.components);
  const double scale = f.grid.cell_volume();
  parallel_for(static_cast<std::size_t>(f.components), [&](std::size_t c) {
    Complex* dst = out.component(static_cast<int>(c));
    const double* src = f.component(static_cast<int>(c));
    for (std::size_t i = 0; i < n; ++i) dst[i] = Complex(src[i], 0.0);
    execute(f.grid, dst, FFTW_FORWARD);
    for (std::size_t i = 0; i < n; ++i) dst[i] *= scale;
  });
  return out;
}

std::vector<Complex> inverse_transform_complex(const SpectralField& g, int component) {
  const std::size_t n = g.grid.size();
  std::vector<Complex> buf(g.component(component), g.component(component) + n);
  execute(g.grid, buf.data(), FFTW_BACKWARD);
  const double scale = 1.0 / g.grid.volume();
  for (auto& v : buf) v *= scale;
  return buf;
}

PhysicalField inverse_transform(const SpectralField& g) {
  const std::size_t n = g.grid.size();
  double largest = 0.0;
  for (const auto& c : g.coefficients) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw NumericalError("inverse_transform: non-finite spectral coefficient");
    largest = std::max(largest, std::abs(c));
  }
  double worst = 0.0;
  int worst_comp = 0;
  std::size_t worst_mode = 0;
  for (int c = 0; c < g.components; ++c) {
    const Complex* v = g.component(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double defect = std::abs(v[i] - std::conj(v[g.grid.mirror(i)]));
      if (defect > worst) {
        worst = defect;
        worst_comp = c;
        worst_mode = i;
      }
    }
  }
  if (worst > 1e-10 * largest) {
    const auto idx = g.grid.unflatten(worst_mode);
    throw NumericalError(fmt::format(
        "inverse_transform: spectrum is not Hermitian; worst mode component {} k = ({}, {}, {}) "
        "with defect {:.3e} (largest coefficient {:.3e})",
        worst_comp, g.grid.wavenumber(idx[0]), g.grid.wavenumber(idx[1]),
        g.grid.wavenumber(idx[2]), worst, largest));
  }
  PhysicalField out(g.grid, g.components);
  parallel_for(static_cast<std::size_t>(g.components), [&](std::size_t c) {
    const auto buf = inverse_transform_complex(g, static_cast<int>(c));
    double* dst = out.component(static_cast<int>(c));
    for (std::size_t i = 0; i < n; ++i) dst[i] = buf[i].real();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Differential operators

namespace {

// Frequency with the Nyquist entries zeroed; used for odd-order symbols.
Vec3 derivative_symbol(const TorusGrid& grid, std::size_t flat) {
  Vec3 xi = grid.frequency(flat);
  const auto idx = grid.unflatten(flat);
  for (int d = 0; d < grid.dim(); ++d)
    if (idx[d] == grid.points_per_axis() / 2) xi[d] = 0.0;
  return xi;
}

}  // namespace

SpectralField spectral_derivative(const SpectralField& g, DerivativeOp op, int axis) {
  const TorusGrid& grid = g.grid;
  const std::size_t n = grid.size();
  const Complex I(0.0, 1.0);
  switch (op) {
    case DerivativeOp::Gradient: {
      if (g.components != 1)
        throw InputError(fmt::format("gradient needs a scalar field (got {} components)",
                                     g.components));
      SpectralField out(grid, grid.dim());
      for (std::size_t i = 0; i < n; ++i) {
        const Vec3 xi = derivative_symbol(grid, i);
        for (int d = 0; d < grid.dim(); ++d) out.at(d, i) = I * xi[d] * g.at(0, i);
      }
      return out;
    }
    case DerivativeOp::Divergence: {
      if (g.components != 3)
        throw InputError(fmt::format("divergence needs 3 components (got {})", g.components));
      SpectralField out(grid, 1);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec3 xi = derivative_symbol(grid, i);
        out.at(0, i) = I * (xi[0] * g.at(0, i) + xi[1] * g.at(1, i) + xi[2] * g.at(2, i));
      }
      return out;
    }
    case DerivativeOp::Curl: {
      if (g.components != 3)
        throw InputError(fmt::format("curl needs 3 components (got {})", g.components));
      if (grid.dim() != 3) throw InputError("curl requires a 3-dimensional grid");
      SpectralField out(grid, 3);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec3 xi = derivative_symbol(grid, i);
        const Complex a = g.at(0, i), b = g.at(1, i), c = g.at(2, i);
        out.at(0, i) = I * (xi[1] * c - xi[2] * b);
        out.at(1, i) = I * (xi[2] * a - xi[0] * c);
        out.at(2, i) = I * (xi[0] * b - xi[1] * a);
      }
      return out;
    }
    case DerivativeOp::Partial: {
      if (axis < 0 || axis >= grid.dim())
        throw InputError(fmt::format("partial derivative axis {} outside dim {}", axis,
                                     grid.dim()));
      SpectralField out(grid, g.components);
      for (std::size_t i = 0; i < n; ++i) {
        const Complex factor = I * derivative_symbol(grid, i)[axis];
        for (int c = 0; c < g.components; ++c) out.at(c, i) = factor * g.at(c, i);
      }
      return out;
    }
  }
  throw InputError("unknown derivative operator");
}

SpectralField solenoidal_projection(const SpectralField& g) {
  if (g.components != 3)
    throw InputError(fmt::format("solenoidal projection needs 3 components (got {})",
                                 g.components));
  SpectralField out = g;
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    const Vec3 xi = derivative_symbol(g.grid, i);
    const double xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if (xi2 == 0.0) continue;
    const Complex dot = xi[0] * g.at(0, i) + xi[1] * g.at(1, i) + xi[2] * g.at(2, i);
    for (int c = 0; c < 3; ++c) out.at(c, i) -= xi[c] * dot / xi2;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Norms

double lp_norm(const PhysicalField& f, double p) {
  if (!(p >= 1.0)) throw InputError(fmt::format("lp_norm requires p >= 1 (got {})", p));
  const std::size_t n = f.grid.size();
  auto magnitude2 = [&](std::size_t i) {
    double s = 0.0;
    for (int c = 0; c < f.components; ++c) s += f.at(c, i) * f.at(c, i);
    return s;
  };
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, magnitude2(i));
    return std::sqrt(m);
  }
  CompensatedSum sum;
  if (p == 2.0) {
    for (std::size_t i = 0; i < n; ++i) sum.add(magnitude2(i));
    return std::sqrt(sum.value() * f.grid.cell_volume());
  }
  if (p == 1.0) {
    for (std::size_t i = 0; i < n; ++i) sum.add(std::sqrt(magnitude2(i)));
    return sum.value() * f.grid.cell_volume();
  }
  for (std::size_t i = 0; i < n; ++i) sum.add(std::pow(magnitude2(i), 0.5 * p));
  return std::pow(sum.value() * f.grid.cell_volume(), 1.0 / p);
}

double spectral_l2_norm(const SpectralField& g) {
  CompensatedSum sum;
  for (const auto& c : g.coefficients) sum.add(std::norm(c));
  return std::sqrt(sum.value() / g.grid.volume());
}

std::vector<double> spectral_mean(const SpectralField& g) {
  std::vector<double> mean(g.components);
  for (int c = 0; c < g.components; ++c) mean[c] = g.at(c, 0).real() / g.grid.volume();
  return mean;
}

}  // namespace frequalize
