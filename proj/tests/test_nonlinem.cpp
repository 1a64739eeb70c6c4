#include <doctest.h>

#include <cmath>
#include <string>

#include "frequalize/equilibrium.hpp"
#include "frequalize/error.hpp"
#include "frequalize/linem.hpp"
#include "frequalize/nonlinem.hpp"
#include "support.hpp"

using namespace frequalize;

namespace {

const TorusGrid kGrid(3, 50.0, 16);

SimState sample_state(double amplitude, std::uint64_t seed = 3) {
  return initial_data_gen(kGrid, EquilibriumState{}, seed, amplitude);
}

double diff_norm(const SpectralField& a, const SpectralField& b) {
  SpectralField d = a;
  d -= b;
  return spectral_l2_norm(d);
}

}  // namespace

TEST_CASE("equilibrium is stationary") {
  SimState s{0.0, SpectralField(kGrid, slot::kCount), EquilibriumState{}};
  CHECK(spectral_l2_norm(rhs_eval(s)) == 0.0);
  StepperConfig cfg;
  integrate(s, cfg, 2.0, 1);
  CHECK(spectral_l2_norm(s.z) == 0.0);
  CHECK(s.t == doctest::Approx(2.0));
}

TEST_CASE("acoustic plane wave sources match the closed form") {
  TorusGrid g(3, 10.0, 16);
  EquilibriumState eq;
  eq.n_inf = 1.3;
  PhysicalField w(g, slot::kCount);
  const double k = 2.0 * M_PI / g.box_length();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.position(i)[0];
    w.at(slot::kRho, i) = 0.2 * std::cos(k * x);
    w.at(slot::kUpsilon, i) = 0.1 * std::cos(k * x);
  }
  const SimState s{0.0, forward_transform(w), eq};
  const NonlinearSources src = nonlinear_sources(s);
  const PhysicalField q2 = inverse_transform(src.q2);
  const PhysicalField r2 = inverse_transform(src.r2);
  for (std::size_t i : {std::size_t{0}, std::size_t{5 * 256}, std::size_t{7 * 256 + 3}, std::size_t{11 * 256 + 40},
                        std::size_t{15 * 256 + 255}}) {
    const double x = g.position(i)[0];
    const double rho = 0.2 * std::cos(k * x), u = 0.1 * std::cos(k * x);
    const double n = eq.n_inf + rho;
    const double p = std::pow(n, 5.0 / 3.0), p0 = std::pow(eq.n_inf, 5.0 / 3.0);
    const double dp0 = 5.0 / 3.0 * std::pow(eq.n_inf, 2.0 / 3.0);
    const double rem = p - p0 - dp0 * rho;
    CHECK(q2.at(0, i) == doctest::Approx(-eq.n_inf * eq.n_inf * u * u / n - rem).epsilon(1e-12));
    CHECK(q2.at(1, i) == doctest::Approx(-rem).epsilon(1e-12));
    CHECK(q2.at(2, i) == doctest::Approx(-rem).epsilon(1e-12));
    for (int c = 3; c < 6; ++c) CHECK(std::abs(q2.at(c, i)) <= 1e-14);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(r2.at(c, i)) <= 1e-14);
  }
}

TEST_CASE("Lorentz and charge sources") {
  TorusGrid g(3, 10.0, 8);
  PhysicalField w(g, slot::kCount);
  for (std::size_t i = 0; i < g.size(); ++i) {
    w.at(slot::kRho, i) = 0.1;
    w.at(slot::kUpsilon + 0, i) = 0.2;
    w.at(slot::kElectric + 1, i) = 0.3;
    w.at(slot::kMagnetic + 2, i) = 0.5;
  }
  const NonlinearSources src = nonlinear_sources({0.0, forward_transform(w), EquilibriumState{}});
  const PhysicalField r2 = inverse_transform(src.r2);
  // -rho E - n u x h with u = 0.2 e_x, h = 0.5 e_z: u x h = -0.1 e_y
  CHECK(r2.at(0, 3) == doctest::Approx(0.0));
  CHECK(r2.at(1, 3) == doctest::Approx(-0.03 + 0.1));
  CHECK(r2.at(2, 3) == doctest::Approx(0.0));
}

TEST_CASE("deviation from the linear generator is quadratic") {
  const SimState base = sample_state(1.0);
  double prev = 0.0;
  for (double eps : {0.08, 0.04, 0.02}) {
    SimState s = base;
    s.z *= eps;
    const double dev = diff_norm(rhs_eval(s), apply_generator(s.z, s.eq));
    if (prev > 0.0) CHECK(prev / dev == doctest::Approx(4.0).epsilon(0.10));
    prev = dev;
  }
}

TEST_CASE("dealias mask") {
  TorusGrid g(3, 1.0, 12);
  const auto m = dealias_mask(g);
  CHECK(m[g.flatten({4, 0, 0})] == 1);
  CHECK(m[g.flatten({5, 0, 0})] == 0);
  CHECK(m[g.flatten({0, 8, 0})] == 1);  // k = -4
  CHECK(m[g.flatten({0, 7, 0})] == 0);  // k = -5
  CHECK(m[g.flatten({6, 0, 0})] == 0);  // Nyquist
}

TEST_CASE("RK4 converges at fourth order") {
  const SimState s0 = sample_state(0.3);
  StepperConfig cfg;
  auto run = [&](double dt) {
    SimState s = s0;
    StepperConfig c = cfg;
    c.dt = dt;
    integrate(s, c, 1.0, 1000);
    return s.z;
  };
  const SpectralField ref = run(0.1 / 8);
  const double e1 = diff_norm(run(0.1), ref);
  const double e2 = diff_norm(run(0.05), ref);
  CHECK(e1 / e2 >= 12.0);
  CHECK(e1 / e2 <= 20.0);
  CHECK(std::log2(e1 / e2) >= 3.5);
}

TEST_CASE("linear regime tracks the matrix exponential") {
  const SimState s0 = sample_state(1e-6);
  SimState s = s0;
  StepperConfig cfg;
  cfg.dt = 0.01;
  integrate(s, cfg, 1.0, 1000);
  const LinearSolution lin = linear_evolve(s0.z, {1.0}, s0.eq, true);
  CHECK(diff_norm(s.z, lin.snapshots[0]) <= 1e-8 * spectral_l2_norm(lin.snapshots[0]));
}

TEST_CASE("constraints, mass and incompatible data") {
  SimState s = sample_state(0.05);
  const ConstraintSample c0 = constraint_sample(s);
  CHECK(c0.div_e_rho <= 1e-12 * c0.z_norm);
  CHECK(c0.div_h <= 1e-12 * c0.z_norm);
  std::vector<SimState> series;
  StepperConfig cfg;
  integrate(s, cfg, 10.0, 5, [&](const SimState& st) { series.push_back(st); });
  for (const auto& c : constraint_monitor(series)) {
    CHECK(c.div_e_rho <= 1e-8 * c.z_norm);
    CHECK(c.div_h <= 1e-8 * c.z_norm);
  }
  CHECK(std::abs(series.back().z.at(slot::kRho, 0)) <= 1e-12);

  // break the Gauss law at one mode pair: the residual is carried unchanged
  SimState bad = sample_state(0.05);
  const std::size_t i = kGrid.flatten({1, 2, 0});
  bad.z.at(slot::kRho, i) += Complex(0.3, 0.1);
  bad.z.at(slot::kRho, kGrid.mirror(i)) += Complex(0.3, -0.1);
  const double r0 = constraint_sample(bad).div_e_rho;
  CHECK(r0 > 1e-3);
  integrate(bad, cfg, 5.0, 1000);
  CHECK(constraint_sample(bad).div_e_rho == doctest::Approx(r0).epsilon(1e-9));
}

TEST_CASE("initial data generator") {
  InitReport rep;
  const SimState s = initial_data_gen(kGrid, EquilibriumState{}, 42, 1e-2, InitProfile{}, &rep);
  CHECK(rep.b52 == doctest::Approx(1e-2).epsilon(1e-10));
  CHECK(std::isfinite(rep.neg));
  CHECK(rep.neg > 0.0);
  CHECK(rep.I1 == doctest::Approx(rep.b52 + rep.neg));
  CHECK(field_constraint_residual(s.z) <= 1e-12);
  for (int c = 0; c < slot::kCount; ++c) CHECK(std::abs(s.z.at(c, 0)) == 0.0);
  const SimState again = initial_data_gen(kGrid, EquilibriumState{}, 42, 1e-2);
  CHECK(again.z.coefficients == s.z.coefficients);
  const SimState other = initial_data_gen(kGrid, EquilibriumState{}, 43, 1e-2);
  CHECK(other.z.coefficients != s.z.coefficients);
  InitProfile wide;
  wide.cutoff = 5.0;
  CHECK_THROWS_AS(initial_data_gen(kGrid, EquilibriumState{}, 1, 1e-2, wide), InputError);
  CHECK_THROWS_AS(initial_data_gen(kGrid, EquilibriumState{}, 1, -1.0), InputError);
}

TEST_CASE("density positivity and instability are detected") {
  TorusGrid g(3, 10.0, 8);
  PhysicalField w(g, slot::kCount);
  w.at(slot::kRho, 37) = -5.0;
  const SimState s{0.0, forward_transform(w), EquilibriumState{}};
  try {
    (void)rhs_eval(s);
    FAIL("expected a density error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("x = (") != std::string::npos);
  }

  SimState big = sample_state(0.05);
  StepperConfig cfg;
  cfg.dt = 4.0;
  CHECK_THROWS_AS(integrate(big, cfg, 400.0, 1), NumericalError);
}

TEST_CASE("experiment guards and determinism") {
  ExperimentSettings st;
  st.grid = kGrid;
  st.T = 10.0;
  st.stride = 2;
  st.fit_window = {1.0, 10.0};
  st.duhamel = true;
  const ExperimentResult a = decay_experiment(st);
  const ExperimentResult b = decay_experiment(st);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].l2 == b.rows[k].l2);
    CHECK(a.rows[k].energy.D0 == b.rows[k].energy.D0);
  }
  CHECK(a.fit.exponent == b.fit.exponent);
  REQUIRE(a.duhamel.has_value());
  CHECK(a.duhamel->modes > 0);

  ExperimentSettings late = st;
  late.grid = TorusGrid(3, 20.0, 16);
  late.T = 100.0;
  late.fit_window = {5.0, 100.0};
  CHECK_THROWS_AS(decay_experiment(late), InputError);
  ExperimentSettings sparse = st;
  sparse.stride = 1000;
  CHECK_THROWS_AS(decay_experiment(sparse), InputError);
}
