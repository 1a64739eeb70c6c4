#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "frequalize/besov.hpp"
#include "frequalize/equilibrium.hpp"
#include "frequalize/fit.hpp"
#include "frequalize/grid.hpp"

namespace frequalize {

/// Perturbation z = (rho, upsilon, E, h) held on the Fourier side, upsilon = n u / n_inf.
struct SimState {
  double t = 0.0;
  SpectralField z;
  EquilibriumState eq;
};

struct StepperConfig {
  double cfl = 0.5;
  double dt = 0.0;  // 0: derived from the CFL condition
  bool dealias = true;
};

/// Throws InputError unless cfl > 0 and dt >= 0.
void validate(const StepperConfig& cfg);

/// True where every |k_j| <= N/3.
std::vector<unsigned char> dealias_mask(const TorusGrid& grid);

/// Zeroes every mode outside the 2/3-rule box.
void apply_dealias(SpectralField& f);

/// Nonlinear sources evaluated on the grid:
///   q2 = -n_inf^2 upsilon (x) upsilon / n - [p(n) - p(n_inf) - p'(n_inf) rho] I   (6 symmetric entries xx,yy,zz,xy,xz,yz)
///   r2 = -rho E - n_inf upsilon x h
struct NonlinearSources {
  SpectralField q2;
  SpectralField r2;
};

/// Throws NumericalError naming the point where n = n_inf + rho <= 0.
NonlinearSources nonlinear_sources(const SimState& state);

/// d/dt z: linear generator plus (div q2 + r2) / n_inf in the upsilon rows.
SpectralField rhs_eval(const SimState& state, bool dealias = true);

/// The nonlinear part only (upsilon rows of rhs_eval minus the linear generator).
SpectralField nonlinear_rhs(const SimState& state, bool dealias = true);

/// C / (xi_max (max|u| + max c_s + 1)), u = n_inf upsilon / n, c_s = sqrt(p'(n)).
double cfl_dt(const SimState& state, double cfl);

/// One classical RK4 step of size dt.
SimState step(const SimState& state, const StepperConfig& cfg, double dt);

/// Integrates to T with n = ceil(T / dt0) equal steps; the observer sees the
/// initial state, every `stride` steps and the final state. Aborts with
/// NumericalError when ||z||_{L^2} exceeds 10x its initial value.
struct IntegrationSummary {
  double dt = 0.0;
  long steps = 0;
};

using StateObserver = std::function<void(const SimState&)>;

IntegrationSummary integrate(SimState& state, const StepperConfig& cfg, double T, long stride,
                             const StateObserver& observer = {});

struct ConstraintSample {
  double t = 0.0;
  double div_e_rho = 0.0;  // ||div E + rho||_{L^2}
  double div_h = 0.0;      // ||div h||_{L^2}
  double z_norm = 0.0;     // ||z||_{L^2}
};

ConstraintSample constraint_sample(const SimState& state);
std::vector<ConstraintSample> constraint_monitor(const std::vector<SimState>& series);

struct InitProfile {
  double width = 0.25;  // Gaussian envelope exp(-|xi|^2 / (2 width^2))
  double cutoff = 0.0;  // hard band limit in |xi|; 0: the dealias cutoff
};

struct InitReport {
  double b52 = 0.0;  // ||z0||_{B^{5/2}_{2,1}}
  double neg = 0.0;  // ||z0||_{Bdot^{-3/2}_{2,inf}}
  double I1 = 0.0;   // b52 + neg
};

/// Random compatible data: rho = div w, E = P_sol(.) - w_parallel so that
/// i xi . E = -rho, h solenoidal and mean-zero, upsilon random; all smooth and
/// band-limited. Scaled so that ||z0||_{B^{5/2}_{2,1}} = amplitude.
SimState initial_data_gen(const TorusGrid& grid, const EquilibriumState& eq, std::uint64_t seed,
                          double amplitude, const InitProfile& profile = {},
                          InitReport* report = nullptr);

struct DuhamelReport {
  std::vector<double> c1_grid;
  std::vector<double> C_curve;
  double c1 = 0.0;
  double C = 0.0;
  bool found = false;
  std::size_t modes = 0;
};

struct ExperimentSettings {
  TorusGrid grid{3, 100.0, 32};
  EquilibriumState eq{};
  std::uint64_t seed = 1;
  double amplitude = 1e-2;
  InitProfile profile{};
  StepperConfig stepper{};
  double T = 100.0;
  long stride = 10;
  FitWindow fit_window{5.0, 100.0};
  bool duhamel = false;
  double C_cap = 10.0;
};

struct ExperimentRow {
  double t = 0.0;
  double l2 = 0.0;
  EnergyValues energy;
  ConstraintSample constraint;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  DecayReport fit;
  InitReport init;
  IntegrationSummary integration;
  double n_ratio = 0.0;  // sup_{[T/2,T]} N / N(T/2)
  std::optional<DuhamelReport> duhamel;
  std::optional<SimState> final_state;
};

/// Initial data, integration, functionals, fit and the optional per-mode
/// Duhamel bound with measured (C, c1).
ExperimentResult decay_experiment(const ExperimentSettings& settings);

}  // namespace frequalize
