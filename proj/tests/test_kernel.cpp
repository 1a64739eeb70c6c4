#include <doctest.h>

#include <cmath>
#include <limits>

#include "frequalize/besov.hpp"
#include "frequalize/error.hpp"
#include "frequalize/kernel.hpp"
#include "frequalize/lp.hpp"
#include "support.hpp"

using namespace frequalize;

namespace {

SpectralField gaussian(const TorusGrid& g, double w) {
  PhysicalField f(g, 1);
  const double c = 0.5 * g.box_length();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    double r2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) r2 += (x[j] - c) * (x[j] - c);
    f.at(0, i) = std::exp(-r2 / (2 * w * w));
  }
  return forward_transform(f);
}

// explicit blocks, explicit weights
double brute_lhs(const SpectralField& f, double t, double s, double alpha, const DissipRate& rate) {
  const BlockIndexRange range = active_blocks(f.grid, true);
  double agg = 0.0;
  for (int q = range.q_min; q <= range.q_max; ++q) {
    SpectralField b = block(f, q, true);
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
      const Vec3 xi = f.grid.frequency(i);
      const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
      b.at(0, i) *= std::exp(-rate.c0 * eta_eval(rate, r) * t);
    }
    const double term = std::pow(2.0, q * s) * spectral_l2_norm(b);
    agg = std::isinf(alpha) ? std::max(agg, term) : agg + std::pow(term, alpha);
  }
  return std::isinf(alpha) ? agg : std::pow(agg, 1.0 / alpha);
}

}  // namespace

TEST_CASE("rate evaluation") {
  const DissipRate r0 = DissipRate::ab(1, 2);
  CHECK(eta_eval(r0, 1.0) == doctest::Approx(0.25));
  CHECK(eta_eval(r0, 10.0) == doctest::Approx(100.0 / (101.0 * 101.0)));
  CHECK(r0.sigma1() == 2.0);
  CHECK(r0.sigma2() == 2.0);
  const DissipRate r11 = DissipRate::ab(1, 1);
  CHECK(eta_eval(r11, 1e6) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r11.sigma2() == 0.0);
  const DissipRate as = DissipRate::asymptotic(1.0, 3.0);
  CHECK(eta_eval(as, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(validate(DissipRate::ab(-1, 2)), InputError);
  CHECK(gamma_exponent(3, 2.0, 1.0, 2.0) == doctest::Approx(0.75));
}

TEST_CASE("hypothesis classification") {
  DecayParams p;
  CHECK(check_hypotheses(p, 3).status == HypothesisStatus::Ok);
  p.r = 1.0;
  p.ell = 1.5;
  CHECK(check_hypotheses(p, 3).status == HypothesisStatus::Borderline);
  p.ell = 1.0;
  CHECK(check_hypotheses(p, 3).status == HypothesisStatus::Violated);
  p = DecayParams{};
  p.s = -2.0;
  CHECK(check_hypotheses(p, 3).status == HypothesisStatus::Violated);
  p = DecayParams{};
  p.ell = -0.1;
  CHECK(check_hypotheses(p, 3).status == HypothesisStatus::Violated);
}

TEST_CASE("lhs against explicit blocks") {
  TorusGrid g(3, 12.0, 16);
  const SpectralField f = gaussian(g, 1.0);
  const DissipRate rate = DissipRate::ab(1, 2, 0.7);
  for (double t : {0.0, 1.0, 30.0})
    for (double alpha : {1.0, 2.0, std::numeric_limits<double>::infinity()})
      CHECK(lhs_norm(f, t, 0.5, alpha, rate) ==
            doctest::Approx(brute_lhs(f, t, 0.5, alpha, rate)).epsilon(1e-10));
}

TEST_CASE("lhs at t = 0 is the homogeneous Besov norm") {
  TorusGrid g(3, 12.0, 16);
  const SpectralField f = forward_transform(fqt::noise(g, 1, 3));
  const double b = besov_norm(f, BesovSpec{1.0, 2.0, 2.0, true}).value;
  CHECK(lhs_norm(f, 0.0, 1.0, 2.0, DissipRate::ab(1, 2)) == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("profile maximum matches a scan") {
  for (auto [a, c, s] : {std::tuple{1.5, 0.3, 2.0}, std::tuple{0.75, 1.0, 1.0}, std::tuple{3.0, 0.05, 4.0}}) {
    double best = 0.0;
    for (double x = 1e-4; x < 200.0; x *= 1.0005) best = std::max(best, std::pow(x, a) * std::exp(-c * std::pow(x, s)));
    CHECK(profile_maximum(a, c, s) == doctest::Approx(best).epsilon(1e-5));
  }
}

TEST_CASE("inequality report on admissible parameters") {
  TorusGrid g(3, 16.0, 32);
  const SpectralField f = gaussian(g, 1.0);
  std::vector<double> times{0.0, 1.0, 10.0, 100.0, 1000.0};
  const InequalityReport r = verify_inequality(f, times, DecayParams{}, DissipRate::ab(1, 2));
  CHECK(std::isfinite(r.sup_ratio));
  CHECK(r.sup_ratio > 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(r.lhs[k] >= 0.0);
    CHECK(r.low[k] >= 0.0);
    CHECK(r.high[k] >= 0.0);
  }
  CHECK(r.low_exponent == doctest::Approx(-0.75));
  CHECK(r.high_exponent == doctest::Approx(-1.0));
  CHECK(r.gamma == doctest::Approx(0.0));
  CHECK(r.profile_rate > 0.0);
}

TEST_CASE("hypothesis violations are rejected unless allowed") {
  TorusGrid g(3, 16.0, 16);
  const SpectralField f = gaussian(g, 1.0);
  DecayParams p;
  p.r = 1.0;
  p.ell = 0.5;
  CHECK_THROWS_AS(rhs_bound(f, 1.0, p, DissipRate::ab(1, 2)), HypothesisError);
  CHECK_NOTHROW(rhs_bound(f, 1.0, p, DissipRate::ab(1, 2), true));
  CHECK_THROWS_AS(rhs_bound(f, 1.0, DecayParams{}, DissipRate::ab(1, 1)), HypothesisError);
}

TEST_CASE("radial integral diverges below the threshold") {
  DecayParams p;
  p.r = 1.0;
  p.ell = 0.5;
  const RadialIntegralReport bad = radial_integral(3, p, 2.0, 1.0, 1.0);
  CHECK(bad.diverges);
  CHECK(bad.measured_exponent == doctest::Approx(bad.predicted_exponent).epsilon(0.05));
  p.ell = 2.0;
  const RadialIntegralReport good = radial_integral(3, p, 2.0, 1.0, 1.0);
  CHECK_FALSE(good.diverges);
  CHECK(std::isfinite(weight_norm(3, p, 2.0, 1.0, 1.0)));
  p.ell = 0.5;
  CHECK(std::isinf(weight_norm(3, p, 2.0, 1.0, 1.0)));
}

TEST_CASE("spike data exposes the sharp threshold") {
  DecayParams p;
  p.r = 1.0;
  p.ell = 0.5;
  const SharpnessReport bad = sharpness_probe(3, 16.0, {8, 16, 32}, {0.0, 1.0, 10.0}, p, DissipRate::ab(1, 2));
  CHECK(bad.diverges);
  CHECK(bad.predicted_growth == doctest::Approx(2.0));
  p.ell = 2.5;
  const SharpnessReport ok = sharpness_probe(3, 16.0, {8, 16, 32}, {0.0, 1.0, 10.0}, p, DissipRate::ab(1, 2));
  CHECK_FALSE(ok.diverges);
}
