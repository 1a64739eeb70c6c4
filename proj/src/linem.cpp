#include "frequalize/linem.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "frequalize/error.hpp"
#include "frequalize/parallel.hpp"

namespace frequalize {

namespace {

constexpr Complex kI{0.0, 1.0};

double norm3(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

std::string xi_text(const Vec3& xi) { return fmt::format("({:.6g}, {:.6g}, {:.6g})", xi[0], xi[1], xi[2]); }

void check_finite(const Mode& z, const char* what) {
  for (int k = 0; k < 10; ++k)
    if (!std::isfinite(z[k].real()) || !std::isfinite(z[k].imag()))
      throw NumericalError(fmt::format("{}: non-finite entry in slot {}", what, k));
}

// C^inf ramp 0 -> 1 on [0, 1]
double smooth_ramp(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double up = std::exp(-1.0 / x), down = std::exp(-1.0 / (1.0 - x));
  return up / (up + down);
}

// Golub-Welsch nodes and weights on [-1, 1]
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = beta;
    J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    x[static_cast<std::size_t>(k)] = es.eigenvalues()[k];
    w[static_cast<std::size_t>(k)] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
  return {x, w};
}

}  // namespace

void validate(const EquilibriumState& eq) {
  if (!(eq.n_inf > 0.0)) throw InputError(fmt::format("n_inf must be > 0 (got {})", eq.n_inf));
  if (!(eq.pressure.K > 0.0)) throw InputError(fmt::format("pressure K must be > 0 (got {})", eq.pressure.K));
  if (!(eq.pressure.gamma >= 1.0))
    throw InputError(fmt::format("pressure gamma must be >= 1 (got {})", eq.pressure.gamma));
  if (!(eq.dp_inf() > 0.0)) throw InputError(fmt::format("p'(n_inf) must be > 0 (got {})", eq.dp_inf()));
  for (double b : eq.B_inf)
    if (!std::isfinite(b)) throw InputError("B_inf must be finite");
}

Eigen::Matrix3d skew(const Vec3& x) {
  Eigen::Matrix3d m;
  m << 0.0, -x[2], x[1],
       x[2], 0.0, -x[0],
       -x[1], x[0], 0.0;
  return m;
}

ModeSymbols assemble_symbols(const Vec3& xi, const EquilibriumState& eq) {
  validate(eq);
  const double n = eq.n_inf, dp = eq.dp_inf(), a = eq.a_inf();
  ModeSymbols s;
  s.A0.setZero();
  s.A0(0, 0) = a;
  for (int k = 1; k < 4; ++k) s.A0(k, k) = n;
  for (int k = 4; k < 10; ++k) s.A0(k, k) = 1.0;

  s.A.setZero();
  for (int j = 0; j < 3; ++j) {
    s.A(0, 1 + j) = dp * xi[j];
    s.A(1 + j, 0) = dp * xi[j];
  }
  const Eigen::Matrix3d om = skew(xi);
  s.A.block<3, 3>(slot::kElectric, slot::kMagnetic) = -om;
  s.A.block<3, 3>(slot::kMagnetic, slot::kElectric) = om;

  s.L.setZero();
  s.L.block<3, 3>(slot::kUpsilon, slot::kUpsilon) = n * (Eigen::Matrix3d::Identity() - skew(eq.B_inf));
  s.L.block<3, 3>(slot::kUpsilon, slot::kElectric) = n * Eigen::Matrix3d::Identity();
  s.L.block<3, 3>(slot::kElectric, slot::kUpsilon) = -n * Eigen::Matrix3d::Identity();
  return s;
}

ModeMatrix assemble_mode_matrix(const Vec3& xi, const EquilibriumState& eq) {
  const ModeSymbols s = assemble_symbols(xi, eq);
  ModeMatrix m = -(kI * s.A.cast<Complex>() + s.L.cast<Complex>());
  for (int r = 0; r < 10; ++r) m.row(r) /= s.A0(r, r);
  return m;
}

Eigen::Matrix<Complex, 2, 10> constraint_rows(const Vec3& xi) {
  Eigen::Matrix<Complex, 2, 10> c = Eigen::Matrix<Complex, 2, 10>::Zero();
  c(0, slot::kRho) = 1.0;
  for (int j = 0; j < 3; ++j) {
    c(0, slot::kElectric + j) = kI * xi[j];
    c(1, slot::kMagnetic + j) = kI * xi[j];
  }
  return c;
}

ModeMatrix constraint_projector(const Vec3& xi) {
  const ModeMatrix id = ModeMatrix::Identity();
  if (norm3(xi) == 0.0) {
    ModeMatrix p = id;
    p(slot::kRho, slot::kRho) = 0.0;
    return p;
  }
  const auto c = constraint_rows(xi);
  const Eigen::Matrix2cd gram = c * c.adjoint();
  return id - c.adjoint() * gram.inverse() * c;
}

double constraint_residual(const Mode& z, const Vec3& xi) {
  const Eigen::Vector2cd r = constraint_rows(xi) * z;
  return std::max(std::abs(r[0]), std::abs(r[1]));
}

ModePropagator::ModePropagator(const Vec3& xi, const EquilibriumState& eq)
    : xi_(xi), M_(assemble_mode_matrix(xi, eq)) {
  Eigen::ComplexEigenSolver<ModeMatrix> solver(M_, true);
  if (solver.info() != Eigen::Success) {
    fallback_ = true;
    cond_ = std::numeric_limits<double>::infinity();
    return;
  }
  V_ = solver.eigenvectors();
  lambda_ = solver.eigenvalues();
  Eigen::JacobiSVD<ModeMatrix> svd(V_);
  const auto& sv = svd.singularValues();
  cond_ = sv[9] > 0.0 ? sv[0] / sv[9] : std::numeric_limits<double>::infinity();
  if (cond_ > 1e8) {
    fallback_ = true;
    return;
  }
  V_inv_ = V_.inverse();
  if (richardson_defect(1.0) > 1e-10) fallback_ = true;
}

ModeMatrix ModePropagator::exponential(double t) const {
  if (fallback_) return (M_ * Complex(t)).exp();
  Mode e;
  for (int k = 0; k < 10; ++k) e[k] = std::exp(lambda_[k] * t);
  return V_ * e.asDiagonal() * V_inv_;
}

double ModePropagator::richardson_defect(double t) const {
  const ModeMatrix full = exponential(t);
  const ModeMatrix half = exponential(0.5 * t);
  return (full - half * half).norm() / full.norm();
}

Mode ModePropagator::apply(const Mode& z0, double t) const {
  if (!(t >= 0.0)) throw InputError(fmt::format("propagation time must be >= 0 (got {})", t));
  check_finite(z0, "propagate_mode");
  if (fallback_) return exponential(t) * z0;
  const Mode c = V_inv_ * z0;
  Mode e;
  for (int k = 0; k < 10; ++k) e[k] = std::exp(lambda_[k] * t) * c[k];
  return V_ * e;
}

Mode propagate_mode(const Mode& z0, const Vec3& xi, double t, const EquilibriumState& eq) {
  check_finite(z0, "propagate_mode");
  return ModePropagator(xi, eq).apply(z0, t);
}

double spectral_gap(const Vec3& xi, const EquilibriumState& eq) {
  const ModeMatrix m = assemble_mode_matrix(xi, eq);
  Eigen::MatrixXcd restricted;
  if (norm3(xi) == 0.0) {
    restricted = m.block<6, 6>(slot::kUpsilon, slot::kUpsilon);
  } else {
    Eigen::JacobiSVD<Eigen::Matrix<Complex, 2, 10>> svd(constraint_rows(xi), Eigen::ComputeFullV);
    const Eigen::Matrix<Complex, 10, 8> q = svd.matrixV().rightCols<8>();
    restricted = q.adjoint() * m * q;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(restricted, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError(fmt::format("eigensolver failed at xi = {}", xi_text(xi)));
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
    top = std::max(top, solver.eigenvalues()[k].real());
  return -top;
}

PointwiseReport pointwise_decay_check(const std::vector<PointwiseSample>& samples,
                                      const EquilibriumState& eq, PointwiseOptions options) {
  if (samples.empty()) throw InputError("pointwise_decay_check needs samples");
  if (options.c0_grid.empty())
    for (int k = 0; k < 200; ++k) options.c0_grid.push_back(1e-3 * std::pow(2000.0, k / 199.0));
  std::vector<double> ratio(samples.size()), exponent(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const double size = s.z0.norm();
    if (!(size > 0.0)) throw InputError(fmt::format("sample {} has zero initial data", i));
    const double res = constraint_residual(s.z0, s.xi) / size;
    if (res > options.residual_tolerance)
      throw InputError(fmt::format(
          "sample {} violates the Gauss constraints (relative residual {:.3e} at xi = {})", i, res,
          xi_text(s.xi)));
  }
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto& s = samples[i];
    ratio[i] = propagate_mode(s.z0, s.xi, s.t, eq).norm() / s.z0.norm();
    exponent[i] = eta0(norm3(s.xi)) * s.t;
  });
  PointwiseReport rep;
  rep.c0_grid = options.c0_grid;
  for (double c0 : options.c0_grid) {
    double C = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) C = std::max(C, ratio[i] * std::exp(c0 * exponent[i]));
    rep.C_curve.push_back(C);
    if (C <= options.C_cap && c0 > rep.c0) {
      rep.c0 = c0;
      rep.C = C;
      rep.found = true;
    }
  }
  return rep;
}

SpectralField apply_generator(const SpectralField& z, const EquilibriumState& eq) {
  validate(eq);
  if (z.components != slot::kCount)
    throw InputError(fmt::format("linear generator needs 10 components, got {}", z.components));
  const double n = eq.n_inf, a = eq.a_inf();
  const Vec3& B = eq.B_inf;
  SpectralField out(z.grid, slot::kCount);
  parallel_for(z.grid.size(), [&](std::size_t i) {
    const Vec3 xi = z.grid.frequency(i);
    const Complex rho = z.at(slot::kRho, i);
    Complex u[3], e[3], h[3];
    for (int j = 0; j < 3; ++j) {
      u[j] = z.at(slot::kUpsilon + j, i);
      e[j] = z.at(slot::kElectric + j, i);
      h[j] = z.at(slot::kMagnetic + j, i);
    }
    const Complex div_u = kI * (xi[0] * u[0] + xi[1] * u[1] + xi[2] * u[2]);
    out.at(slot::kRho, i) = -n * div_u;
    const Complex bxu[3] = {B[1] * u[2] - B[2] * u[1], B[2] * u[0] - B[0] * u[2],
                            B[0] * u[1] - B[1] * u[0]};
    const Complex xxh[3] = {xi[1] * h[2] - xi[2] * h[1], xi[2] * h[0] - xi[0] * h[2],
                            xi[0] * h[1] - xi[1] * h[0]};
    const Complex xxe[3] = {xi[1] * e[2] - xi[2] * e[1], xi[2] * e[0] - xi[0] * e[2],
                            xi[0] * e[1] - xi[1] * e[0]};
    for (int j = 0; j < 3; ++j) {
      out.at(slot::kUpsilon + j, i) = -a * kI * xi[j] * rho - u[j] + bxu[j] - e[j];
      out.at(slot::kElectric + j, i) = kI * xxh[j] + n * u[j];
      out.at(slot::kMagnetic + j, i) = -kI * xxe[j];
    }
  });
  return out;
}

double field_constraint_residual(const SpectralField& z) {
  if (z.components != slot::kCount)
    throw InputError(fmt::format("constraint residual needs 10 components, got {}", z.components));
  CompensatedSum res, size;
  for (std::size_t i = 0; i < z.grid.size(); ++i) {
    const Vec3 xi = z.grid.frequency(i);
    Complex ge = z.at(slot::kRho, i), gh = 0.0;
    for (int j = 0; j < 3; ++j) {
      ge += kI * xi[j] * z.at(slot::kElectric + j, i);
      gh += kI * xi[j] * z.at(slot::kMagnetic + j, i);
    }
    res.add(std::norm(ge) + std::norm(gh));
    for (int c = 0; c < slot::kCount; ++c) size.add(std::norm(z.at(c, i)));
  }
  return size.value() > 0.0 ? std::sqrt(res.value() / size.value()) : 0.0;
}

LinearSolution linear_evolve(const SpectralField& z0, const std::vector<double>& times,
                             const EquilibriumState& eq, bool keep_snapshots) {
  validate(eq);
  if (z0.components != slot::kCount)
    throw InputError(fmt::format("linear_evolve needs 10 components, got {}", z0.components));
  if (times.empty()) throw InputError("linear_evolve needs at least one time");
  for (double t : times)
    if (!(t >= 0.0)) throw InputError(fmt::format("times must be >= 0 (got {})", t));
  const double residual = field_constraint_residual(z0);
  if (residual > 1e-10)
    throw InputError(fmt::format(
        "initial data violate div E = -rho / div h = 0 (relative residual {:.3e})", residual));
  const double scale = spectral_l2_norm(z0) * z0.grid.volume();
  const double mean_tol = 1e-10 * std::max(scale, 1e-300);
  if (std::abs(z0.at(slot::kRho, 0)) > mean_tol)
    throw InputError("initial density perturbation must have zero mean");
  for (int j = 0; j < 3; ++j)
    if (std::abs(z0.at(slot::kMagnetic + j, 0)) > mean_tol)
      throw InputError("initial magnetic perturbation must have zero mean");

  const std::size_t nt = times.size();
  const std::size_t n_modes = z0.grid.size();
  LinearSolution sol;
  sol.times = times;
  if (keep_snapshots) sol.snapshots.assign(nt, SpectralField(z0.grid, slot::kCount));

  constexpr std::size_t kChunks = 64;
  // partial[chunk][time][0..2: derivative orders, 3: constraint residual]
  std::vector<std::vector<std::array<double, 4>>> partial(
      kChunks, std::vector<std::array<double, 4>>(nt, {0.0, 0.0, 0.0, 0.0}));
  parallel_chunks(n_modes, kChunks, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::vector<std::array<CompensatedSum, 4>> acc(nt);
    for (std::size_t i = begin; i < end; ++i) {
      Mode m0;
      double energy0 = 0.0;
      for (int c = 0; c < slot::kCount; ++c) {
        m0[c] = z0.at(c, i);
        energy0 += std::norm(m0[c]);
      }
      if (energy0 == 0.0) continue;
      const Vec3 xi = z0.grid.frequency(i);
      const double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
      const ModePropagator prop(xi, eq);
      const auto rows = constraint_rows(xi);
      for (std::size_t k = 0; k < nt; ++k) {
        const Mode m = prop.apply(m0, times[k]);
        const double e = m.squaredNorm();
        acc[k][0].add(e);
        acc[k][1].add(r2 * e);
        acc[k][2].add(r2 * r2 * e);
        acc[k][3].add((rows * m).squaredNorm());
        if (keep_snapshots)
          for (int c = 0; c < slot::kCount; ++c) sol.snapshots[k].at(c, i) = m[c];
      }
    }
    for (std::size_t k = 0; k < nt; ++k)
      for (int j = 0; j < 4; ++j) partial[chunk][k][static_cast<std::size_t>(j)] = acc[k][static_cast<std::size_t>(j)].value();
  });

  const double inv_volume = 1.0 / z0.grid.volume();
  for (auto& v : sol.derivative_norms) v.assign(nt, 0.0);
  sol.constraint_residual.assign(nt, 0.0);
  for (std::size_t k = 0; k < nt; ++k) {
    std::array<CompensatedSum, 4> total;
    for (std::size_t c = 0; c < kChunks; ++c)
      for (std::size_t j = 0; j < 4; ++j) total[j].add(partial[c][k][j]);
    for (std::size_t j = 0; j < 3; ++j) sol.derivative_norms[j][k] = std::sqrt(total[j].value() * inv_volume);
    sol.constraint_residual[k] = std::sqrt(total[3].value() * inv_volume);
  }
  return sol;
}

Mode continuum_initial_mode(const ContinuumDecayConfig& cfg, const Vec3& xi) {
  const double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  const double r = std::sqrt(r2);
  Mode z = Mode::Zero();
  auto transverse = [&](const Vec3& v, double scale) {
    const double dot = r2 > 0.0 ? (xi[0] * v[0] + xi[1] * v[1] + xi[2] * v[2]) / r2 : 0.0;
    for (int j = 0; j < 3; ++j) z[slot::kMagnetic + j] = scale * (v[j] - dot * xi[j]);
  };
  if (cfg.data == DecayData::Gaussian) {
    const double s2 = cfg.sigma * cfg.sigma;
    const double g = std::pow(2.0 * std::numbers::pi * s2, 1.5) * std::exp(-0.5 * s2 * r2);
    const Vec3& a = cfg.a;
    // E0 = a G, rho0 = -div E0
    z[slot::kRho] = -kI * (xi[0] * a[0] + xi[1] * a[1] + xi[2] * a[2]) * g;
    for (int j = 0; j < 3; ++j) {
      z[slot::kUpsilon + j] = cfg.c[j] * g;
      z[slot::kElectric + j] = a[j] * g;
    }
    transverse(cfg.b, g);
  } else {
    if (r == 0.0) return z;
    const double envelope = smooth_ramp((r - cfg.high_onset) / cfg.high_onset) *
                            std::pow(r, -(cfg.ell + 1.5));
    transverse(cfg.b, envelope);
  }
  return z;
}

ContinuumDecayResult continuum_decay(const ContinuumDecayConfig& cfg) {
  validate(cfg.eq);
  if (cfg.times.empty()) throw InputError("continuum_decay needs times");
  if (cfg.panels < 1 || cfg.radial_points < 1 || cfg.polar_points < 1 || cfg.azimuth_points < 1)
    throw InputError("continuum_decay quadrature sizes must be positive");
  if (cfg.data == DecayData::Gaussian && !(cfg.sigma > 0.0))
    throw InputError(fmt::format("Gaussian width must be > 0 (got {})", cfg.sigma));
  const double t_max = *std::max_element(cfg.times.begin(), cfg.times.end());

  ContinuumDecayResult res;
  res.times = cfg.times;
  if (cfg.data == DecayData::Gaussian) {
    res.r_min = cfg.r_min > 0.0 ? cfg.r_min : 1e-5;
    res.r_max = cfg.r_max > 0.0 ? cfg.r_max : 12.0 / cfg.sigma;
  } else {
    res.r_min = cfg.r_min > 0.0 ? cfg.r_min : cfg.high_onset;
    res.r_max = cfg.r_max > 0.0 ? cfg.r_max
                                : std::max(10.0 * cfg.high_onset, 100.0 * std::sqrt(std::max(t_max, 1.0)));
  }
  if (!(res.r_max > res.r_min)) throw InputError("continuum_decay needs r_max > r_min");

  // radial nodes: Gauss-Legendre on log-spaced panels
  std::vector<double> rn, rw;
  const auto [rx, rwt] = gauss_legendre(cfg.radial_points);
  const double lr0 = std::log(res.r_min), lr1 = std::log(res.r_max);
  for (int p = 0; p < cfg.panels; ++p) {
    const double a = std::exp(lr0 + (lr1 - lr0) * p / cfg.panels);
    const double b = std::exp(lr0 + (lr1 - lr0) * (p + 1) / cfg.panels);
    for (std::size_t k = 0; k < rx.size(); ++k) {
      rn.push_back(0.5 * (a + b) + 0.5 * (b - a) * rx[k]);
      rw.push_back(0.5 * (b - a) * rwt[k]);
    }
  }
  // directions: Gauss-Legendre in cos(theta) times uniform azimuth
  std::vector<Vec3> dirs;
  std::vector<double> dw;
  const auto [ct, wt] = gauss_legendre(cfg.polar_points);
  for (std::size_t k = 0; k < ct.size(); ++k) {
    const double st = std::sqrt(std::max(0.0, 1.0 - ct[k] * ct[k]));
    for (int p = 0; p < cfg.azimuth_points; ++p) {
      const double ph = 2.0 * std::numbers::pi * p / cfg.azimuth_points;
      dirs.push_back({st * std::cos(ph), st * std::sin(ph), ct[k]});
      dw.push_back(wt[k] * 2.0 * std::numbers::pi / cfg.azimuth_points);
    }
  }

  const std::size_t nt = cfg.times.size();
  std::vector<std::vector<std::array<double, 3>>> partial(rn.size(),
                                                          std::vector<std::array<double, 3>>(nt));
  std::vector<int> fallback(rn.size(), 0);
  parallel_for(rn.size(), [&](std::size_t ir) {
    const double r = rn[ir];
    std::vector<std::array<CompensatedSum, 3>> acc(nt);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      const Vec3 xi{r * dirs[d][0], r * dirs[d][1], r * dirs[d][2]};
      const Mode z0 = continuum_initial_mode(cfg, xi);
      if (z0.squaredNorm() == 0.0) continue;
      const ModePropagator prop(xi, cfg.eq);
      if (prop.uses_fallback()) ++fallback[ir];
      for (std::size_t k = 0; k < nt; ++k) {
        const double e = prop.apply(z0, cfg.times[k]).squaredNorm() * dw[d];
        acc[k][0].add(e);
        acc[k][1].add(r * r * e);
        acc[k][2].add(r * r * r * r * e);
      }
    }
    for (std::size_t k = 0; k < nt; ++k)
      for (std::size_t j = 0; j < 3; ++j) partial[ir][k][j] = acc[k][j].value() * rw[ir] * r * r;
  });

  const double norm_factor = 1.0 / std::pow(2.0 * std::numbers::pi, 3);
  for (auto& v : res.norms) v.assign(nt, 0.0);
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t j = 0; j < 3; ++j) {
      CompensatedSum total;
      for (std::size_t ir = 0; ir < rn.size(); ++ir) total.add(partial[ir][k][j]);
      res.norms[j][k] = std::sqrt(total.value() * norm_factor);
    }
  }
  for (int f : fallback) res.fallback_modes += f;
  return res;
}

}  // namespace frequalize
