#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "frequalize/equilibrium.hpp"
#include "frequalize/grid.hpp"

namespace frequalize {

using Mode = Eigen::Matrix<Complex, 10, 1>;
using ModeMatrix = Eigen::Matrix<Complex, 10, 10>;
using RealMatrix10 = Eigen::Matrix<double, 10, 10>;

/// Omega_x with Omega_x e = x cross e.
Eigen::Matrix3d skew(const Vec3& x);

/// Symmetric-hyperbolic pieces of the linearized system at xi:
/// A0 z_t + i A(xi) z + L z = 0 with A(xi) = sum_j xi_j A^j.
struct ModeSymbols {
  RealMatrix10 A0;
  RealMatrix10 A;
  RealMatrix10 L;
};

ModeSymbols assemble_symbols(const Vec3& xi, const EquilibriumState& eq);

/// M(xi) = -A0^{-1} (i A(xi) + L); validates eq.
ModeMatrix assemble_mode_matrix(const Vec3& xi, const EquilibriumState& eq);

/// Constraint functionals (i xi . E + rho, i xi . h) as rows acting on a mode.
Eigen::Matrix<Complex, 2, 10> constraint_rows(const Vec3& xi);

/// Orthogonal projector onto {i xi . E + rho = 0, i xi . h = 0}; at xi = 0
/// only rho = 0 remains.
ModeMatrix constraint_projector(const Vec3& xi);

/// max(|i xi . E + rho|, |i xi . h|)
double constraint_residual(const Mode& z, const Vec3& xi);

/// e^{t M(xi)} by eigendecomposition, or by Pade scaling-and-squaring when the
/// eigenvector matrix is ill-conditioned (cond > 1e8) or fails the
/// halved-step self-check P(1) = P(1/2)^2 to 1e-10.
class ModePropagator {
public:
  ModePropagator(const Vec3& xi, const EquilibriumState& eq);

  [[nodiscard]] Mode apply(const Mode& z0, double t) const;
  [[nodiscard]] ModeMatrix exponential(double t) const;
  /// ||P(t) - P(t/2)^2||_F / ||P(t)||_F
  [[nodiscard]] double richardson_defect(double t) const;

  [[nodiscard]] const ModeMatrix& matrix() const { return M_; }
  [[nodiscard]] const Mode& eigenvalues() const { return lambda_; }
  [[nodiscard]] double eigenvector_condition() const { return cond_; }
  [[nodiscard]] bool uses_fallback() const { return fallback_; }

private:
  Vec3 xi_;
  ModeMatrix M_;
  ModeMatrix V_;
  ModeMatrix V_inv_;
  Mode lambda_;
  double cond_ = 1.0;
  bool fallback_ = false;
};

/// z(t) = e^{t M(xi)} z0; non-finite input or t < 0 rejected.
Mode propagate_mode(const Mode& z0, const Vec3& xi, double t, const EquilibriumState& eq);

/// -max Re(lambda) of M(xi) restricted to the constraint subspace; at xi = 0
/// the upsilon-E block is used.
double spectral_gap(const Vec3& xi, const EquilibriumState& eq);

struct PointwiseSample {
  Vec3 xi;
  Mode z0;
  double t;
};

struct PointwiseOptions {
  std::vector<double> c0_grid;  // empty: 200 log-spaced values in [1e-3, 2]
  double C_cap = 10.0;
  double residual_tolerance = 1e-8;
};

/// For each trial c0: C(c0) = sup |z(t)| / (e^{-c0 eta0 t} |z0|). Reports the
/// largest c0 with C(c0) <= C_cap.
struct PointwiseReport {
  double C = 0.0;
  double c0 = 0.0;
  bool found = false;
  std::vector<double> c0_grid;
  std::vector<double> C_curve;
};

PointwiseReport pointwise_decay_check(const std::vector<PointwiseSample>& samples,
                                      const EquilibriumState& eq, PointwiseOptions options = {});

/// dz/dt = M(xi) z on every lattice mode of a 10-component field.
SpectralField apply_generator(const SpectralField& z, const EquilibriumState& eq);

struct LinearSolution {
  std::vector<double> times;
  std::array<std::vector<double>, 3> derivative_norms;  // ||D^k z||_{L^2}, k = 0, 1, 2
  std::vector<double> constraint_residual;              // ||(div E + rho, div h)||_{L^2}
  std::vector<SpectralField> snapshots;                 // when requested
};

/// Per-mode exact propagation of a constraint-compatible, mean-zero field.
LinearSolution linear_evolve(const SpectralField& z0, const std::vector<double>& times,
                             const EquilibriumState& eq, bool keep_snapshots = false);

/// Relative L^2 size of (div E + rho, div h) against ||z||_{L^2}.
double field_constraint_residual(const SpectralField& z);

enum class DecayData { Gaussian, HighFrequency };

/// Continuum radial x angular quadrature of ||D^k z(t)||_{L^2(R^3)}.
struct ContinuumDecayConfig {
  DecayData data = DecayData::Gaussian;
  double sigma = 2.0;  // Gaussian width
  double ell = 1.0;    // high-frequency data: |xi|^{-(ell + 3/2)} envelope
  double high_onset = 10.0;
  Vec3 a{0.3, 0.1, -0.2};
  Vec3 b{1.0, 0.5, 0.2};
  Vec3 c{0.2, -0.4, 0.1};
  double r_min = 0.0;  // 0: chosen from the data
  double r_max = 0.0;
  int panels = 40;
  int radial_points = 8;
  int polar_points = 10;
  int azimuth_points = 12;
  std::vector<double> times;
  EquilibriumState eq{};
};

/// Initial mode of the configured data at xi (constraint-compatible).
Mode continuum_initial_mode(const ContinuumDecayConfig& cfg, const Vec3& xi);

struct ContinuumDecayResult {
  std::vector<double> times;
  std::array<std::vector<double>, 3> norms;
  double r_min = 0.0;
  double r_max = 0.0;
  int fallback_modes = 0;
};

ContinuumDecayResult continuum_decay(const ContinuumDecayConfig& cfg);

}  // namespace frequalize
