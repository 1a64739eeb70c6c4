#include "frequalize/nonlinem.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "frequalize/error.hpp"
#include "frequalize/linem.hpp"
#include "frequalize/parallel.hpp"

namespace frequalize {

namespace {

constexpr Complex kI{0.0, 1.0};

// per-axis frequency with the unpaired Nyquist component dropped, so odd
// symbols keep spectra Hermitian
Vec3 derivative_frequency(const TorusGrid& g, std::size_t i) {
  Vec3 xi = g.frequency(i);
  const auto idx = g.unflatten(i);
  for (int j = 0; j < g.dim(); ++j)
    if (g.points_per_axis() % 2 == 0 && idx[j] == g.points_per_axis() / 2) xi[j] = 0.0;
  return xi;
}

void require_state(const SimState& s) {
  if (s.z.components != slot::kCount)
    throw InputError(fmt::format("simulation state needs 10 components, got {}", s.z.components));
  validate(s.eq);
}

std::vector<unsigned char> keep_mask(const TorusGrid& g, bool dealias) {
  if (dealias) return dealias_mask(g);
  std::vector<unsigned char> m(g.size(), 1);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.on_nyquist(i)) m[i] = 0;
  return m;
}

void apply_mask(SpectralField& f, const std::vector<unsigned char>& mask) {
  const std::size_t n = f.grid.size();
  for (int c = 0; c < f.components; ++c) {
    Complex* p = f.component(c);
    for (std::size_t i = 0; i < n; ++i)
      if (!mask[i]) p[i] = 0.0;
  }
}

double squared_l2(const Complex* p, std::size_t n) {
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) s.add(std::norm(p[i]));
  return s.value();
}

}  // namespace

void validate(const StepperConfig& cfg) {
  if (!(cfg.cfl > 0.0) || !std::isfinite(cfg.cfl))
    throw InputError(fmt::format("stepper.cfl must be positive, got {}", cfg.cfl));
  if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt))
    throw InputError(fmt::format("stepper.dt must be >= 0 (0 selects CFL), got {}", cfg.dt));
}

std::vector<unsigned char> dealias_mask(const TorusGrid& grid) {
  const int N = grid.points_per_axis();
  std::vector<unsigned char> m(grid.size(), 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    for (int j = 0; j < grid.dim(); ++j) {
      const int k = std::abs(grid.wavenumber(idx[j]));
      if (3 * k > N) m[i] = 0;
    }
  }
  return m;
}

void apply_dealias(SpectralField& f) { apply_mask(f, dealias_mask(f.grid)); }

NonlinearSources nonlinear_sources(const SimState& state) {
  require_state(state);
  const TorusGrid& g = state.z.grid;
  const std::size_t n = g.size();
  const PhysicalField w = inverse_transform(state.z);
  const double n_inf = state.eq.n_inf;
  const PressureLaw& law = state.eq.pressure;

  PhysicalField q2(g, 6), r2(g, 3);
  std::vector<double> bad(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const double rho = w.at(slot::kRho, i);
    const double dens = n_inf + rho;
    if (!(dens > 0.0)) {
      bad[i] = 1.0;
      return;
    }
    double u[3], e[3], h[3];
    for (int j = 0; j < 3; ++j) {
      u[j] = w.at(slot::kUpsilon + j, i);
      e[j] = w.at(slot::kElectric + j, i);
      h[j] = w.at(slot::kMagnetic + j, i);
    }
    const double c = -n_inf * n_inf / dens;
    const double rem = law.remainder(dens, n_inf);
    q2.at(0, i) = c * u[0] * u[0] - rem;
    q2.at(1, i) = c * u[1] * u[1] - rem;
    q2.at(2, i) = c * u[2] * u[2] - rem;
    q2.at(3, i) = c * u[0] * u[1];
    q2.at(4, i) = c * u[0] * u[2];
    q2.at(5, i) = c * u[1] * u[2];
    const double uxh[3] = {u[1] * h[2] - u[2] * h[1], u[2] * h[0] - u[0] * h[2],
                           u[0] * h[1] - u[1] * h[0]};
    for (int j = 0; j < 3; ++j) r2.at(j, i) = -rho * e[j] - n_inf * uxh[j];
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (bad[i] != 0.0) {
      const Vec3 x = g.position(i);
      throw NumericalError(fmt::format(
          "density n = {:.6g} <= 0 at x = ({:.4g}, {:.4g}, {:.4g}), t = {:.6g}",
          n_inf + w.at(slot::kRho, i), x[0], x[1], x[2], state.t));
    }
  }
  return {forward_transform(q2), forward_transform(r2)};
}

SpectralField nonlinear_rhs(const SimState& state, bool dealias) {
  const NonlinearSources src = nonlinear_sources(state);
  const TorusGrid& g = state.z.grid;
  const double inv_n = 1.0 / state.eq.n_inf;
  SpectralField out(g, slot::kCount);
  // symmetric index of q2 entry (i, j)
  static constexpr int sym[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
  parallel_for(g.size(), [&](std::size_t i) {
    const Vec3 xi = derivative_frequency(g, i);
    for (int a = 0; a < 3; ++a) {
      Complex div = 0.0;
      for (int b = 0; b < 3; ++b) div += kI * xi[b] * src.q2.at(sym[a][b], i);
      out.at(slot::kUpsilon + a, i) = (div + src.r2.at(a, i)) * inv_n;
    }
  });
  apply_mask(out, keep_mask(g, dealias));
  return out;
}

SpectralField rhs_eval(const SimState& state, bool dealias) {
  require_state(state);
  SpectralField out = apply_generator(state.z, state.eq);
  out += nonlinear_rhs(state, dealias);
  apply_mask(out, keep_mask(state.z.grid, dealias));
  return out;
}

double cfl_dt(const SimState& state, double cfl) {
  require_state(state);
  if (!(cfl > 0.0)) throw InputError(fmt::format("CFL number must be positive, got {}", cfl));
  const PhysicalField w = inverse_transform(state.z);
  double umax = 0.0, cmax = 0.0;
  for (std::size_t i = 0; i < w.grid.size(); ++i) {
    const double dens = state.eq.n_inf + w.at(slot::kRho, i);
    if (!(dens > 0.0)) {
      const Vec3 x = w.grid.position(i);
      throw NumericalError(fmt::format("density n = {:.6g} <= 0 at x = ({:.4g}, {:.4g}, {:.4g})",
                                       dens, x[0], x[1], x[2]));
    }
    double u2 = 0.0;
    for (int j = 0; j < 3; ++j) u2 += w.at(slot::kUpsilon + j, i) * w.at(slot::kUpsilon + j, i);
    umax = std::max(umax, state.eq.n_inf * std::sqrt(u2) / dens);
    cmax = std::max(cmax, std::sqrt(state.eq.pressure.dp(dens)));
  }
  return cfl / (state.z.grid.xi_max() * (umax + cmax + 1.0));
}

SimState step(const SimState& s, const StepperConfig& cfg, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw InputError(fmt::format("time step must be positive, got {}", dt));
  auto stage = [&](double t, const SpectralField& z) {
    return rhs_eval(SimState{t, z, s.eq}, cfg.dealias);
  };
  const SpectralField k1 = stage(s.t, s.z);
  SpectralField z = s.z;
  z.add_scaled(0.5 * dt, k1);
  const SpectralField k2 = stage(s.t + 0.5 * dt, z);
  z = s.z;
  z.add_scaled(0.5 * dt, k2);
  const SpectralField k3 = stage(s.t + 0.5 * dt, z);
  z = s.z;
  z.add_scaled(dt, k3);
  const SpectralField k4 = stage(s.t + dt, z);

  SimState next{s.t + dt, s.z, s.eq};
  next.z.add_scaled(dt / 6.0, k1);
  next.z.add_scaled(dt / 3.0, k2);
  next.z.add_scaled(dt / 3.0, k3);
  next.z.add_scaled(dt / 6.0, k4);
  return next;
}

IntegrationSummary integrate(SimState& state, const StepperConfig& cfg, double T, long stride,
                             const StateObserver& observer) {
  validate(cfg);
  require_state(state);
  if (!(T >= 0.0) || !std::isfinite(T))
    throw InputError(fmt::format("integration horizon T must be >= 0, got {}", T));
  if (stride < 1) throw InputError(fmt::format("sample stride must be >= 1, got {}", stride));
  apply_mask(state.z, keep_mask(state.z.grid, cfg.dealias));

  IntegrationSummary sum;
  if (observer) observer(state);
  if (T == 0.0) return sum;
  const double dt0 = cfg.dt > 0.0 ? cfg.dt : cfl_dt(state, cfg.cfl);
  sum.steps = static_cast<long>(std::ceil(T / dt0 - 1e-9));
  sum.steps = std::max(sum.steps, 1L);
  sum.dt = T / static_cast<double>(sum.steps);

  const double t0 = state.t;
  const std::size_t total = state.z.coefficients.size();
  const double norm0 = std::sqrt(squared_l2(state.z.coefficients.data(), total));
  for (long k = 1; k <= sum.steps; ++k) {
    state = step(state, cfg, sum.dt);
    state.t = t0 + static_cast<double>(k) * sum.dt;
    const double norm = std::sqrt(squared_l2(state.z.coefficients.data(), total));
    if (!std::isfinite(norm))
      throw NumericalError(fmt::format("non-finite state at t = {:.6g} (step {})", state.t, k));
    if (norm0 > 0.0 && norm > 10.0 * norm0)
      throw NumericalError(fmt::format(
          "instability: coefficient norm grew from {:.6g} to {:.6g} by t = {:.6g} (step {}, dt = {:.4g})",
          norm0, norm, state.t, k, sum.dt));
    if (observer && (k % stride == 0 || k == sum.steps)) observer(state);
  }
  return sum;
}

ConstraintSample constraint_sample(const SimState& state) {
  require_state(state);
  const TorusGrid& g = state.z.grid;
  CompensatedSum ge, gh;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 xi = g.frequency(i);
    Complex e = state.z.at(slot::kRho, i), h = 0.0;
    for (int j = 0; j < 3; ++j) {
      e += kI * xi[j] * state.z.at(slot::kElectric + j, i);
      h += kI * xi[j] * state.z.at(slot::kMagnetic + j, i);
    }
    ge.add(std::norm(e));
    gh.add(std::norm(h));
  }
  const double inv_v = 1.0 / g.volume();
  return {state.t, std::sqrt(ge.value() * inv_v), std::sqrt(gh.value() * inv_v),
          spectral_l2_norm(state.z)};
}

std::vector<ConstraintSample> constraint_monitor(const std::vector<SimState>& series) {
  std::vector<ConstraintSample> out;
  out.reserve(series.size());
  for (const auto& s : series) out.push_back(constraint_sample(s));
  return out;
}

SimState initial_data_gen(const TorusGrid& grid, const EquilibriumState& eq, std::uint64_t seed,
                          double amplitude, const InitProfile& profile, InitReport* report) {
  validate(eq);
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw InputError(fmt::format("init.amplitude must be positive, got {}", amplitude));
  if (!(profile.width > 0.0))
    throw InputError(fmt::format("init.profile.width must be positive, got {}", profile.width));
  const double box = 2.0 * M_PI / grid.box_length() * (grid.points_per_axis() / 3);
  const double cut = profile.cutoff > 0.0 ? profile.cutoff : box;
  if (cut > box * (1.0 + 1e-12))
    throw InputError(fmt::format(
        "init.profile.cutoff {} exceeds the dealias cutoff {:.6g}", cut, box));
  if (cut < grid.xi_min())
    throw InputError(fmt::format("init.profile.cutoff {} keeps no nonzero mode (xi_min = {:.6g})",
                                 cut, grid.xi_min()));

  // w (3), E seed (3), h seed (3), upsilon (3)
  PhysicalField noise(grid, 12);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : noise.values) v = normal(gen);
  SpectralField raw = forward_transform(noise);
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 xi = grid.frequency(i);
    const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    const double env = (r > 0.0 && r <= cut) ? std::exp(-r * r / (2.0 * profile.width * profile.width)) : 0.0;
    for (int c = 0; c < 12; ++c) raw.at(c, i) *= env;
  }

  auto pick = [&](int first) {
    SpectralField f(grid, 3);
    for (int c = 0; c < 3; ++c) std::copy_n(raw.component(first + c), n, f.component(c));
    return f;
  };
  const SpectralField w = pick(0);
  const SpectralField e_sol = solenoidal_projection(pick(3));
  const SpectralField h_sol = solenoidal_projection(pick(6));

  SimState s{0.0, SpectralField(grid, slot::kCount), eq};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 xi = grid.frequency(i);
    const double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if (r2 == 0.0) continue;
    Complex rho = 0.0;
    for (int j = 0; j < 3; ++j) rho += kI * xi[j] * w.at(j, i);
    s.z.at(slot::kRho, i) = rho;
    for (int j = 0; j < 3; ++j) {
      s.z.at(slot::kUpsilon + j, i) = raw.at(9 + j, i);
      s.z.at(slot::kElectric + j, i) = e_sol.at(j, i) + kI * xi[j] * rho / r2;
      s.z.at(slot::kMagnetic + j, i) = h_sol.at(j, i);
    }
  }
  const double raw_norm = besov_norm(s.z, BesovSpec{2.5, 2.0, 1.0, false}).value;
  if (!(raw_norm > 0.0)) throw NumericalError("generated initial data vanished");
  s.z *= amplitude / raw_norm;

  if (report) {
    report->b52 = besov_norm(s.z, BesovSpec{2.5, 2.0, 1.0, false}).value;
    report->neg = negative_norm(s.z, 1.5);
    report->I1 = report->b52 + report->neg;
  }
  return s;
}

namespace {

struct ModeTrace {
  std::size_t index;
  double eta;
  double z0_sq;
  std::vector<double> z_sq;
  std::vector<double> source_sq;  // |xi|^2 |Q|^2 + |R|^2
};

std::vector<std::size_t> pick_modes(const SpectralField& z0, std::size_t want) {
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < z0.grid.size(); ++i) {
    double m = 0.0;
    for (int c = 0; c < z0.components; ++c) m += std::norm(z0.at(c, i));
    if (m > 0.0) cand.push_back(i);
  }
  if (cand.size() <= want) return cand;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < want; ++k) out.push_back(cand[k * cand.size() / want]);
  return out;
}

DuhamelReport duhamel_fit(const std::vector<double>& times, const std::vector<ModeTrace>& modes,
                          double C_cap) {
  DuhamelReport rep;
  rep.modes = modes.size();
  const int count = 100;
  for (int k = 0; k < count; ++k)
    rep.c1_grid.push_back(1e-3 * std::pow(2.0 / 1e-3, k / double(count - 1)));
  for (double c1 : rep.c1_grid) {
    double C = 0.0;
    for (const auto& m : modes) {
      for (std::size_t a = 0; a < times.size(); ++a) {
        const double t = times[a];
        double integral = 0.0;
        for (std::size_t b = 1; b <= a; ++b) {
          const double f0 = std::exp(-c1 * m.eta * (t - times[b - 1])) * m.source_sq[b - 1];
          const double f1 = std::exp(-c1 * m.eta * (t - times[b])) * m.source_sq[b];
          integral += 0.5 * (times[b] - times[b - 1]) * (f0 + f1);
        }
        const double bracket = std::exp(-c1 * m.eta * t) * m.z0_sq + integral;
        if (bracket > 0.0) C = std::max(C, m.z_sq[a] / bracket);
      }
    }
    rep.C_curve.push_back(C);
    if (C <= C_cap) {
      rep.found = true;
      rep.c1 = c1;
      rep.C = C;
    }
  }
  return rep;
}

}  // namespace

ExperimentResult decay_experiment(const ExperimentSettings& st) {
  validate(st.stepper);
  if (!(st.T > 0.0)) throw InputError(fmt::format("experiment.T must be positive, got {}", st.T));
  if (st.fit_window.t2 > st.T)
    throw InputError(fmt::format("experiment.fit_window ends at {} beyond T = {}",
                                 st.fit_window.t2, st.T));
  if (!(st.fit_window.t2 > st.fit_window.t1) || st.fit_window.t1 < 0.0)
    throw InputError(fmt::format("experiment.fit_window [{}, {}] must satisfy 0 <= t1 < t2",
                                 st.fit_window.t1, st.fit_window.t2));
  check_saturation(st.fit_window, st.grid);

  ExperimentResult res;
  SimState state = initial_data_gen(st.grid, st.eq, st.seed, st.amplitude, st.profile, &res.init);

  EnergyTracker tracker(st.grid);
  std::vector<double> times;
  std::vector<ModeTrace> traces;
  if (st.duhamel) {
    for (std::size_t i : pick_modes(state.z, 32)) {
      const Vec3 xi = st.grid.frequency(i);
      const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
      traces.push_back({i, eta0(r), 0.0, {}, {}});
    }
  }
  const double inv_n = 1.0 / st.eq.n_inf;
  res.integration = integrate(state, st.stepper, st.T, st.stride, [&](const SimState& s) {
    ExperimentRow row;
    row.t = s.t;
    row.l2 = spectral_l2_norm(s.z);
    row.energy = tracker.push(s.t, s.z);
    row.constraint = constraint_sample(s);
    res.rows.push_back(row);
    times.push_back(s.t);
    if (!traces.empty()) {
      const NonlinearSources src = nonlinear_sources(s);
      for (auto& m : traces) {
        const std::size_t i = m.index;
        const Vec3 xi = s.z.grid.frequency(i);
        double zsq = 0.0, qsq = 0.0, rsq = 0.0;
        for (int c = 0; c < slot::kCount; ++c) zsq += std::norm(s.z.at(c, i));
        for (int c = 0; c < 6; ++c) qsq += (c < 3 ? 1.0 : 2.0) * std::norm(src.q2.at(c, i));
        for (int c = 0; c < 3; ++c) rsq += std::norm(src.r2.at(c, i));
        const double xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if (m.z_sq.empty()) m.z0_sq = zsq;
        m.z_sq.push_back(zsq);
        m.source_sq.push_back((xi2 * qsq + rsq) * inv_n * inv_n);
      }
    }
  });
  res.final_state = state;

  std::vector<double> l2;
  for (const auto& r : res.rows) l2.push_back(r.l2);
  res.fit = fit_decay_exponent(times, l2, st.fit_window, "l2");
  res.fit.saturation_time = saturation_time(st.grid);

  const double half = 0.5 * st.T;
  double n_half = -1.0, n_sup = 0.0;
  for (const auto& r : res.rows) {
    if (r.t + 1e-12 < half) continue;
    if (n_half < 0.0) n_half = r.energy.N;
    n_sup = std::max(n_sup, r.energy.N);
  }
  res.n_ratio = n_half > 0.0 ? n_sup / n_half : 0.0;

  if (!traces.empty()) res.duhamel = duhamel_fit(times, traces, st.C_cap);
  return res;
}

}  // namespace frequalize
