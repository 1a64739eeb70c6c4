#include <doctest.h>

#include <cmath>
#include <limits>

#include "frequalize/besov.hpp"
#include "frequalize/equilibrium.hpp"
#include "frequalize/error.hpp"
#include "frequalize/lp.hpp"
#include "support.hpp"

using namespace frequalize;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PhysicalField plane_wave(const TorusGrid& g, int k) {
  PhysicalField f(g, 1);
  for (std::size_t i = 0; i < g.size(); ++i)
    f.at(0, i) = std::cos(2.0 * M_PI * k * g.position(i)[0] / g.box_length());
  return f;
}

PhysicalField bump(const TorusGrid& g, double w) {
  PhysicalField f(g, 1);
  const double c = 0.5 * g.box_length();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    double r2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) r2 += (x[j] - c) * (x[j] - c);
    f.at(0, i) = std::exp(-r2 / (2 * w * w));
  }
  return f;
}

}  // namespace

TEST_CASE("plane wave against the closed-form block sum") {
  TorusGrid g(3, 10.0, 16);
  const int k = 3;
  const double r = 2.0 * M_PI * k / g.box_length();
  const double l2 = std::sqrt(g.volume() / 2.0);
  for (double s : {-1.0, 0.0, 1.5}) {
    for (double rr : {1.0, 2.0, kInf}) {
      double agg = 0.0;
      for (int q = -10; q <= 10; ++q) {
        const double term = std::pow(2.0, q * s) * default_cutoffs().phi(std::ldexp(r, -q));
        agg = std::isinf(rr) ? std::max(agg, term) : agg + std::pow(term, rr);
      }
      if (!std::isinf(rr)) agg = std::pow(agg, 1.0 / rr);
      const double got = besov_norm(plane_wave(g, k), BesovSpec{s, 2.0, rr, true}).value;
      CHECK(got == doctest::Approx(l2 * agg).epsilon(1e-10));
    }
  }
}

TEST_CASE("norm axioms on random pairs") {
  TorusGrid g(3, 8.0, 16);
  for (int trial = 0; trial < 5; ++trial) {
    const PhysicalField f = fqt::noise(g, 1, 2 * trial + 1);
    const PhysicalField h = fqt::noise(g, 1, 2 * trial + 2);
    PhysicalField sum(g, 1), scaled(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      sum.at(0, i) = f.at(0, i) + h.at(0, i);
      scaled.at(0, i) = -2.5 * f.at(0, i);
    }
    for (const BesovSpec spec : {BesovSpec{0.5, 2, 1, true}, BesovSpec{-1, 2, kInf, false},
                                 BesovSpec{1, 1, 2, true}, BesovSpec{0, 4, 1, false}}) {
      const double a = besov_norm(f, spec).value, b = besov_norm(h, spec).value;
      CHECK(besov_norm(sum, spec).value <= a + b + 1e-10 * (a + b));
      CHECK(besov_norm(scaled, spec).value == doctest::Approx(2.5 * a).epsilon(1e-10));
    }
  }
}

TEST_CASE("l^r monotonicity in r") {
  TorusGrid g(3, 8.0, 16);
  const PhysicalField f = fqt::noise(g, 1, 77);
  double prev = kInf;
  for (double r : {1.0, 1.5, 2.0, 4.0, kInf}) {
    const double v = besov_norm(f, BesovSpec{0.7, 2, r, true}).value;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("fourier and physical evaluation agree at p = 2") {
  TorusGrid g(2, 8.0, 32);
  const PhysicalField f = fqt::noise(g, 2, 5);
  const SpectralField fh = forward_transform(f);
  const BesovSpec spec{1.0, 2.0, 1.0, true};
  const NormReport a = besov_norm(fh, spec);
  // same norm through physical-space blocks
  double phys = 0.0;
  for (int q = active_blocks(g, true).q_min; q <= active_blocks(g, true).q_max; ++q)
    phys += std::pow(2.0, q) * lp_norm(inverse_transform(block(fh, q, true)), 2.0);
  CHECK(a.value == doctest::Approx(phys).epsilon(1e-10));
  CHECK(a.mean.size() == 2);
}

TEST_CASE("grid independence for band-limited data") {
  const double L = 10.0;
  double prev = -1.0;
  for (int n : {16, 32, 64}) {
    TorusGrid g(2, L, n);
    PhysicalField f(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 x = g.position(i);
      f.at(0, i) = std::cos(2 * M_PI * 2 * x[0] / L) + 0.5 * std::sin(2 * M_PI * 3 * x[1] / L);
    }
    const double v = besov_norm(f, BesovSpec{1.5, 2, 1, false}).value;
    if (prev > 0.0) CHECK(fqt::rel_diff(v, prev) <= 1e-8);
    prev = v;
  }
}

TEST_CASE("negative norm support bound") {
  TorusGrid g(3, 12.0, 16);
  const SpectralField f = forward_transform(fqt::noise(g, 1, 4));
  const double rho = 1.5;
  const NormReport sup = besov_norm(f, BesovSpec{0, 2, kInf, true});
  double w = 0.0;
  for (const auto& [q, c] : sup.contributions)
    if (c > 0.0) w = std::max(w, std::pow(2.0, -q * rho));
  CHECK(negative_norm(f, rho) <= sup.value * w * (1 + 1e-12));
  CHECK_THROWS_AS(negative_norm(f, 0.0), InputError);
}

TEST_CASE("negative embedding ratio for Gaussians is finite") {
  TorusGrid g(3, 16.0, 32);
  std::vector<ProbePair> samples;
  for (double w : {0.8, 1.0, 1.5}) samples.push_back({bump(g, w), bump(g, w)});
  ProbeParams pp;
  pp.p = 1.0;
  pp.rho = 1.5;
  const ProbeReport r = inequality_probe(ProbeKind::NegativeEmbedding, pp, samples);
  CHECK(std::isfinite(r.max_ratio));
  CHECK(r.max_ratio > 0.0);
  pp.rho = 3.5;
  CHECK_THROWS_AS(inequality_probe(ProbeKind::NegativeEmbedding, pp, samples), HypothesisError);
}

TEST_CASE("probe hypotheses and product kinds") {
  TorusGrid g(2, 8.0, 32);
  std::vector<ProbePair> samples{{bump(g, 1.0), bump(g, 0.7)}};
  ProbeParams pp;
  pp.s = 1.0;
  CHECK(std::isfinite(inequality_probe(ProbeKind::Algebra, pp, samples).max_ratio));
  pp.s = -1.0;
  CHECK_THROWS_AS(inequality_probe(ProbeKind::Algebra, pp, samples), HypothesisError);
  pp.p = 2;
  pp.p_target = 1;
  CHECK_THROWS_AS(inequality_probe(ProbeKind::Embedding, pp, samples), HypothesisError);
  pp.p_target = 4;
  pp.s = 1.0;
  CHECK(std::isfinite(inequality_probe(ProbeKind::Embedding, pp, samples).max_ratio));
  CHECK(probe_kind_from_string(to_string(ProbeKind::Moser)) == ProbeKind::Moser);
  CHECK_THROWS_AS(probe_kind_from_string("bogus"), InputError);
}

TEST_CASE("Chemin-Lerner norms of a constant series") {
  TorusGrid g(2, 8.0, 16);
  const SpectralField f = forward_transform(fqt::noise(g, 1, 6));
  FieldSeries series;
  for (int k = 0; k <= 8; ++k) {
    series.times.push_back(0.5 * k);
    series.samples.push_back(f);
  }
  const CheminLernerSpec spec{BesovSpec{0.5, 2, 1, true}, 2.0};
  const double b = besov_norm(f, spec.besov).value;
  const CheminLernerReport rep = chemin_lerner_norm(series, spec);
  CHECK(rep.value == doctest::Approx(std::sqrt(4.0) * b).epsilon(1e-10));
  CHECK(mixed_norm(series, spec) == doctest::Approx(std::sqrt(4.0) * b).epsilon(1e-10));
  CHECK_FALSE(rep.under_resolved);
  CHECK(rep.refinement_change < 1e-10);

  FieldSeries two{{0.0, 1.0}, {f, f}};
  CHECK(chemin_lerner_norm(two, spec).under_resolved);
}

TEST_CASE("Chemin-Lerner dominates the plain mixed norm for theta >= r") {
  TorusGrid g(2, 8.0, 16);
  FieldSeries series;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.3 * k;
    SpectralField f = forward_transform(fqt::noise(g, 1, 40 + k));
    f *= std::exp(-t);
    series.times.push_back(t);
    series.samples.push_back(f);
  }
  const CheminLernerSpec spec{BesovSpec{0.5, 2, 1, true}, 2.0};
  CHECK(mixed_norm(series, spec) <= chemin_lerner_norm(series, spec).value * (1 + 1e-12));
}

TEST_CASE("energy functionals") {
  TorusGrid g(3, 10.0, 16);
  SUBCASE("zero perturbation") {
    EnergyTracker tr(g);
    SpectralField z(g, slot::kCount);
    for (double t : {0.0, 1.0, 2.0}) {
      const EnergyValues v = tr.push(t, z);
      CHECK(v.N == 0.0);
      CHECK(v.D == 0.0);
      CHECK(v.N0 == 0.0);
      CHECK(v.D0 == 0.0);
    }
  }
  SUBCASE("N is constant for exact (1+t)^-3/4 decay") {
    const SpectralField z0 = forward_transform(fqt::noise(g, slot::kCount, 3));
    EnergyTracker tr(g);
    const double n0 = spectral_l2_norm(z0);
    for (double t : {0.0, 0.5, 2.0, 10.0, 50.0}) {
      SpectralField z = z0;
      z *= std::pow(1.0 + t, -0.75);
      CHECK(tr.push(t, z).N == doctest::Approx(n0).epsilon(1e-12));
    }
  }
  SUBCASE("D is bounded by D0 and times must increase") {
    EnergyTracker tr(g);
    SpectralField z = forward_transform(fqt::noise(g, slot::kCount, 9));
    EnergyValues v{};
    for (double t : {0.0, 1.0, 2.0, 3.0}) {
      z *= 0.8;
      v = tr.push(t, z);
    }
    CHECK(v.D <= v.D0 * (1 + 1e-12));
    CHECK(v.N0 > 0.0);
    CHECK_THROWS_AS(tr.push(3.0, z), InputError);
    SpectralField bad(g, 3);
    CHECK_THROWS_AS(tr.push(4.0, bad), InputError);
  }
}
