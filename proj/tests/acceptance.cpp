// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "frequalize/besov.hpp"
#include "frequalize/equilibrium.hpp"
#include "frequalize/error.hpp"
#include "frequalize/fit.hpp"
#include "frequalize/harness.hpp"
#include "frequalize/kernel.hpp"
#include "frequalize/linem.hpp"
#include "frequalize/lp.hpp"
#include "frequalize/nonlinem.hpp"

using namespace frequalize;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = a * std::pow(b / a, static_cast<double>(k) / (n - 1));
  return out;
}

// least-squares slope of log y against log x for x in [lo, hi]
double log_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < lo * (1 - 1e-12) || x[k] > hi * (1 + 1e-12)) continue;
    const double a = std::log(x[k]), b = std::log(y[k]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    ++m;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

PhysicalField white_noise(const TorusGrid& g, int comps, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  PhysicalField f(g, comps);
  for (double& v : f.values) v = nd(gen);
  return f;
}

double diff_norm(const SpectralField& a, const SpectralField& b) {
  SpectralField d = a;
  d -= b;
  return spectral_l2_norm(d);
}

// ---------------------------------------------------------------------------

Outcome partition_of_unity() {
  double defect = 0.0, recon = 0.0;
  for (const TorusGrid& g : {TorusGrid(3, 20.0, 32), TorusGrid(3, 16.0, 64), TorusGrid(2, 7.0, 128)}) {
    const PartitionDefect d = partition_defect(g);
    defect = std::max({defect, d.inhomogeneous, d.homogeneous});
    SpectralField f = forward_transform(white_noise(g, 2, 17));
    for (int c = 0; c < 2; ++c) f.at(c, 0) = 0.0;
    for (bool hom : {false, true}) {
      SpectralField diff = decompose(f, hom).reconstruct();
      diff -= f;
      recon = std::max(recon, spectral_l2_norm(diff) / spectral_l2_norm(f));
    }
  }
  return {defect <= 1e-10 && recon <= 1e-10,
          fmt::format("max partition defect {:.2e}, max relative reconstruction error {:.2e}", defect, recon)};
}

Outcome bernstein() {
  const TorusGrid g(3, 16.0, 32);
  const BlockTable& table = block_table(g, true);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool ok = true;
  long checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const SpectralField f = forward_transform(white_noise(g, 1, 1000 + trial));
    for (int q = table.range().q_min; q <= table.range().q_max; ++q) {
      if (table.entries(q).empty()) continue;
      const BernsteinReport b = bernstein_check(f, q, 1.0);
      ok = ok && b.within_bounds() && b.ratio >= 0.75 && b.ratio <= 8.0 / 3.0;
      lo = std::min(lo, b.ratio);
      hi = std::max(hi, b.ratio);
      ++checks;
    }
  }
  return {ok, fmt::format("{} block ratios over 100 fields in [{:.4f}, {:.4f}] (bounds [0.75, 2.6667])",
                          checks, lo, hi)};
}

Outcome negative_embedding() {
  const double widths[] = {0.6, 0.8, 1.0, 1.25, 1.5};
  const int points[] = {32, 64, 128};
  double worst = 0.0;
  std::string ratios;
  for (double w : widths) {
    double r[3];
    for (int k = 0; k < 3; ++k) {
      const PhysicalField f = gaussian_field(TorusGrid(3, 16.0, points[k]), w);
      r[k] = negative_norm(f, 1.5) / lp_norm(f, 1.0);
      if (!std::isfinite(r[k]) || r[k] <= 0.0) return {false, fmt::format("non-finite ratio at width {}", w)};
    }
    worst = std::max({worst, std::abs(r[1] / r[0] - 1.0), std::abs(r[2] / r[1] - 1.0)});
    ratios += fmt::format(" {:.4f}", r[2]);
  }
  return {worst <= 0.10,
          fmt::format("ratios at N=128:{}; max change under refinement {:.2e} (limit 0.10)", ratios, worst)};
}

Outcome kernel_inequality() {
  std::vector<double> times{0.0};
  for (double t : logspace(0.1, 1e3, 13)) times.push_back(t);
  const DissipRate rate = DissipRate::ab(1.0, 2.0);
  DecayParams first;  // r = 2, alpha = 2, s = 0, rho = 3/2, ell = 2
  DecayParams second;
  second.r = 1.0;
  second.ell = 1.5;
  std::string detail;
  bool ok = true;
  for (const DecayParams& p : {first, second}) {
    double sup[3];
    const int points[] = {32, 64, 128};
    for (int k = 0; k < 3; ++k) {
      const SpectralField f = forward_transform(gaussian_field(TorusGrid(3, 16.0, points[k]), 1.0));
      sup[k] = verify_inequality(f, times, p, rate, false).sup_ratio;
    }
    const double change = std::max(std::abs(sup[1] / sup[0] - 1.0), std::abs(sup[2] / sup[1] - 1.0));
    ok = ok && std::isfinite(sup[2]) && change <= 0.15;
    detail += fmt::format("(r={}, ell={}) sup ratio {:.4f}, refinement change {:.2e}; ", p.r, p.ell, sup[2],
                          change);
  }
  // below the ell threshold: rejected unless forced, and the forced ratio grows
  DecayParams bad = second;
  bad.ell = 0.5;
  bool rejected = false;
  try {
    (void)verify_inequality(lattice_spike(TorusGrid(3, 16.0, 16)), times, bad, rate, false);
  } catch (const HypothesisError&) {
    rejected = true;
  }
  const SharpnessReport sh = sharpness_probe(3, 16.0, {16, 32, 64}, {0.0, 1.0, 10.0}, bad, rate);
  ok = ok && rejected && sh.diverges && sh.integral.diverges;
  detail += fmt::format("ell=0.5: rejected {}, spike growth per doubling {:.3f} (predicted {:.3f}), radial "
                        "integral diverges {}",
                        rejected, sh.growth.back(), sh.predicted_growth, sh.integral.diverges);
  return {ok, detail};
}

Outcome gap_shape() {
  const EquilibriumState eq;
  const std::vector<double> r = logspace(1e-3, 1e3, 61);
  std::vector<double> c(r.size());
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    c[k] = spectral_gap({r[k], 0.0, 0.0}, eq);
    lo = std::min(lo, c[k] / eta0(r[k]));
    hi = std::max(hi, c[k] / eta0(r[k]));
  }
  // off-axis direction with a magnetic background
  EquilibriumState mag;
  mag.B_inf = {0.2, 0.0, 0.5};
  for (double x : {1e-2, 1.0, 1e2}) {
    const double cx = spectral_gap({0.6 * x, 0.0, 0.8 * x}, mag);
    lo = std::min(lo, cx / eta0(x));
    hi = std::max(hi, cx / eta0(x));
  }
  const double s_low = log_slope(r, c, 1e-3, 1e-1), s_high = log_slope(r, c, 10.0, 1e3);
  const bool ok = std::abs(s_low - 2.0) <= 0.3 && std::abs(s_high + 2.0) <= 0.3 && lo > 0.0;
  return {ok, fmt::format("slopes {:.4f} (low), {:.4f} (high); c/eta0 in [{:.4f}, {:.4f}]", s_low, s_high, lo,
                          hi)};
}

Outcome linear_decay_table() {
  ContinuumDecayConfig g;
  g.data = DecayData::Gaussian;
  g.sigma = 2.0;
  g.times = logspace(10.0, 1e3, 21);
  const ContinuumDecayResult rg = continuum_decay(g);
  const double e0 = fit_decay_exponent(rg.times, rg.norms[0], {10.0, 1e3}).exponent;
  const double e1 = fit_decay_exponent(rg.times, rg.norms[1], {10.0, 1e3}).exponent;

  ContinuumDecayConfig h;
  h.data = DecayData::HighFrequency;
  h.ell = 1.0;
  h.times = logspace(1e3, 1e5, 21);
  const ContinuumDecayResult rh = continuum_decay(h);
  const double eh = fit_decay_exponent(rh.times, rh.norms[0], {1e3, 1e5}).exponent;

  const bool ok = std::abs(e0 + 0.75) <= 0.10 && std::abs(e1 + 1.25) <= 0.10 && std::abs(eh + 0.5) <= 0.15;
  return {ok, fmt::format("Gaussian k=0 {:.4f} (target -0.75), k=1 {:.4f} (target -1.25); high-frequency "
                          "ell=1 {:.4f} (target -0.5)",
                          e0, e1, eh)};
}

Outcome pointwise_bound() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ut(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<PointwiseSample> samples;
  for (int k = 0; k < 1000; ++k) {
    const double r = std::pow(10.0, 3.0 * u(gen));
    Vec3 xi{nd(gen), nd(gen), nd(gen)};
    const double n = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    for (double& c : xi) c *= r / n;
    Mode z;
    for (int c = 0; c < 10; ++c) z(c) = Complex(nd(gen), nd(gen));
    samples.push_back({xi, constraint_projector(xi) * z, std::pow(10.0, 4.0 * ut(gen)) - 1.0});
  }
  const PointwiseReport rep = pointwise_decay_check(samples, EquilibriumState{});
  bool rejected = false;
  samples[500].z0(0) += 1.0;
  try {
    (void)pointwise_decay_check(samples, EquilibriumState{});
  } catch (const InputError&) {
    rejected = true;
  }
  const bool ok = rep.found && rep.c0 > 0.0 && std::isfinite(rep.C) && rejected;
  return {ok, fmt::format("1000 samples: c0 = {:.4g}, C = {:.4g}; incompatible sample rejected {}", rep.c0, rep.C,
                          rejected)};
}

Outcome solver_validity() {
  const TorusGrid grid(3, 100.0, 32);
  const EquilibriumState eq;
  StepperConfig cfg;

  // constraints over T = 50 at the default step
  SimState s = initial_data_gen(grid, eq, 1, 1e-2);
  double worst = 0.0;
  const IntegrationSummary is = integrate(s, cfg, 50.0, 1, [&](const SimState& st) {
    const ConstraintSample c = constraint_sample(st);
    worst = std::max(worst, std::max(c.div_e_rho, c.div_h) / c.z_norm);
  });

  // observed order
  const SimState s0 = initial_data_gen(grid, eq, 3, 0.3);
  auto run = [&](double dt) {
    SimState x = s0;
    StepperConfig c = cfg;
    c.dt = dt;
    integrate(x, c, 1.0, 1000);
    return x.z;
  };
  const SpectralField ref = run(0.1 / 8);
  const double order = std::log2(diff_norm(run(0.1), ref) / diff_norm(run(0.05), ref));

  // deviation from the linear flow under amplitude halving
  const SimState base = initial_data_gen(grid, eq, 5, 1.0);
  double dev[3];
  const double eps[] = {0.08, 0.04, 0.02};
  for (int k = 0; k < 3; ++k) {
    SimState x = base;
    x.z *= eps[k];
    dev[k] = diff_norm(rhs_eval(x), apply_generator(x.z, x.eq));
  }
  const double q1 = dev[0] / dev[1], q2 = dev[1] / dev[2];
  const bool ok = worst <= 1e-8 && order >= 3.5 && std::abs(q1 / 4.0 - 1.0) <= 0.10 &&
                  std::abs(q2 / 4.0 - 1.0) <= 0.10;
  return {ok, fmt::format("max relative constraint residual {:.2e} over {} steps (dt {:.4f}); RK4 order "
                          "{:.3f}; halving ratios {:.4f}, {:.4f} (target 4)",
                          worst, is.steps, is.dt, order, q1, q2)};
}

Outcome desk_scale_decay() {
  ExperimentSettings st;  // 32^3, L = 100, amplitude 1e-2, T = 100, window [5, 100]
  const ExperimentResult res = decay_experiment(st);
  const bool ok = res.fit.exponent >= -1.1 && res.fit.exponent <= -0.4 && std::isfinite(res.n_ratio) &&
                  res.n_ratio <= 1.5;
  return {ok, fmt::format("fitted exponent {:.4f} (R^2 {:.4f}, {} samples) on [{}, {}]; sup N on [T/2, T] "
                          "over N(T/2) = {:.4f}; saturation time {:.1f}",
                          res.fit.exponent, res.fit.r_squared, res.fit.samples, res.fit.window.t1,
                          res.fit.window.t2, res.n_ratio, res.fit.saturation_time)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "frequalize_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  write_text(root / "nonlinear.json", R"({"grid": {"dim": 3, "box_length": 50, "points_per_axis": 16},
    "init": {"seed": 7, "amplitude": 0.01}, "experiment": {"T": 10, "stride": 2, "fit_window": [1, 10],
    "duhamel": true}})");
  const std::vector<std::string> commands{
      "lp check",
      "besov norm --spec 1.5,2,1,inhom --input noise",
      "kernel verify --params 0,2,1.5,2,2 --input gaussian:1",
      "linear gap --xi-range 0.001:1000:21",
      "--config " + (root / "nonlinear.json").string() + " nonlinear"};
  int compared = 0;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    std::vector<fs::path> dirs;
    for (const char* threads : {"1", "4"}) {
      const fs::path dir = root / fmt::format("run{}_{}", k, threads);
      const std::string cmd = fmt::format("FREQUALIZE_THREADS={} {} --seed 11 --dump --out {} {} > /dev/null 2>&1",
                                          threads, FREQUALIZE_CLI, dir.string(), commands[k]);
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + commands[k]};
      dirs.push_back(dir);
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dirs[0])) files.push_back(e.path().filename());
    if (files.empty()) return {false, "no output from: " + commands[k]};
    for (const auto& f : files) {
      if (slurp(dirs[0] / f) != slurp(dirs[1] / f)) return {false, "outputs differ: " + f.string()};
      ++compared;
    }
  }
  fs::remove_all(root);
  return {true, fmt::format("{} output files byte-identical across reruns with 1 and 4 threads", compared)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"partition of unity and reconstruction", partition_of_unity},
      {"Bernstein block ratios", bernstein},
      {"negative Besov embedding of L1", negative_embedding},
      {"frequency-localized decay inequality", kernel_inequality},
      {"regularity-loss spectral gap shape", gap_shape},
      {"linear decay rates", linear_decay_table},
      {"pointwise mode bound", pointwise_bound},
      {"nonlinear solver validity", solver_validity},
      {"desk-scale nonlinear decay", desk_scale_decay},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    fmt::print("{} criterion {}: {} | {} [{:.1f}s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
               o.detail, secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
