#include "frequalize/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "frequalize/besov.hpp"
#include "frequalize/equilibrium.hpp"
#include "frequalize/error.hpp"
#include "frequalize/field_io.hpp"
#include "frequalize/fit.hpp"
#include "frequalize/kernel.hpp"
#include "frequalize/linem.hpp"
#include "frequalize/lp.hpp"
#include "frequalize/nonlinem.hpp"

namespace frequalize {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) { return fmt::format("{:.12e}", v); }

const char* type_name(const Json& j) { return j.type_name(); }

}  // namespace

// ---- config access -------------------------------------------------------

ConfigNode::ConfigNode(const Json& json, std::string path) : json_(&json), path_(std::move(path)) {
  if (!json.is_object())
    throw InputError(fmt::format("config {}: expected an object, got {}",
                                 path_.empty() ? "/" : path_, type_name(json)));
}

const Json* ConfigNode::find(const std::string& key) const {
  auto it = json_->find(key);
  return it == json_->end() ? nullptr : &*it;
}

bool ConfigNode::has(const std::string& key) const { return find(key) != nullptr; }

ConfigNode ConfigNode::child(const std::string& key) const {
  const Json* j = find(key);
  if (!j) throw InputError(fmt::format("config {}: missing required object", at(key)));
  return ConfigNode(*j, at(key));
}

ConfigNode ConfigNode::child_or_empty(const std::string& key) const {
  static const Json empty = Json::object();
  const Json* j = find(key);
  return ConfigNode(j ? *j : empty, at(key));
}

double ConfigNode::number(const std::string& key, std::optional<double> fallback) const {
  const Json* j = find(key);
  if (!j) {
    if (fallback) return *fallback;
    throw InputError(fmt::format("config {}: missing required number", at(key)));
  }
  if (!j->is_number())
    throw InputError(fmt::format("config {}: expected a number, got {}", at(key), type_name(*j)));
  return j->get<double>();
}

double ConfigNode::extended(const std::string& key, std::optional<double> fallback) const {
  const Json* j = find(key);
  if (j && j->is_string()) {
    if (j->get<std::string>() == "inf") return kInf;
    throw InputError(fmt::format("config {}: expected a number or \"inf\"", at(key)));
  }
  return number(key, fallback);
}

long ConfigNode::integer(const std::string& key, std::optional<long> fallback) const {
  const Json* j = find(key);
  if (!j) {
    if (fallback) return *fallback;
    throw InputError(fmt::format("config {}: missing required integer", at(key)));
  }
  if (!j->is_number_integer())
    throw InputError(fmt::format("config {}: expected an integer, got {}", at(key), type_name(*j)));
  return j->get<long>();
}

std::uint64_t ConfigNode::unsigned_integer(const std::string& key,
                                           std::optional<std::uint64_t> fallback) const {
  const Json* j = find(key);
  if (!j) {
    if (fallback) return *fallback;
    throw InputError(fmt::format("config {}: missing required integer", at(key)));
  }
  if (!j->is_number_unsigned())
    throw InputError(fmt::format("config {}: expected a nonnegative integer", at(key)));
  return j->get<std::uint64_t>();
}

bool ConfigNode::boolean(const std::string& key, std::optional<bool> fallback) const {
  const Json* j = find(key);
  if (!j) {
    if (fallback) return *fallback;
    throw InputError(fmt::format("config {}: missing required boolean", at(key)));
  }
  if (!j->is_boolean())
    throw InputError(fmt::format("config {}: expected a boolean, got {}", at(key), type_name(*j)));
  return j->get<bool>();
}

std::string ConfigNode::text(const std::string& key, std::optional<std::string> fallback) const {
  const Json* j = find(key);
  if (!j) {
    if (fallback) return *fallback;
    throw InputError(fmt::format("config {}: missing required string", at(key)));
  }
  if (!j->is_string())
    throw InputError(fmt::format("config {}: expected a string, got {}", at(key), type_name(*j)));
  return j->get<std::string>();
}

std::vector<double> ConfigNode::numbers(const std::string& key) const {
  const Json* j = find(key);
  if (!j || !j->is_array())
    throw InputError(fmt::format("config {}: expected an array of numbers", at(key)));
  std::vector<double> out;
  for (std::size_t k = 0; k < j->size(); ++k) {
    const Json& v = (*j)[k];
    if (!v.is_number())
      throw InputError(fmt::format("config {}/{}: expected a number, got {}", at(key), k, type_name(v)));
    out.push_back(v.get<double>());
  }
  return out;
}

Vec3 ConfigNode::vec3(const std::string& key, std::optional<Vec3> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw InputError(fmt::format("config {}: missing required 3-vector", at(key)));
  }
  const auto v = numbers(key);
  if (v.size() != 3)
    throw InputError(fmt::format("config {}: expected 3 numbers, got {}", at(key), v.size()));
  return {v[0], v[1], v[2]};
}

void ConfigNode::only(const std::vector<std::string>& allowed) const {
  for (auto it = json_->begin(); it != json_->end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw InputError(fmt::format("config {}: unknown key", at(it.key())));
}

Json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open config file {}", path.string()));
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(fmt::format("config {}: malformed JSON: {}", path.string(), e.what()));
  }
}

TorusGrid parse_grid(const ConfigNode& node, int dim, double box_length, int points) {
  node.only({"dim", "box_length", "points_per_axis"});
  const long d = node.integer("dim", dim);
  const long n = node.integer("points_per_axis", points);
  const double L = node.number("box_length", box_length);
  if (d < 1 || d > 3) throw InputError(fmt::format("config {}/dim: must be 1, 2 or 3", node.path()));
  if (n < 2) throw InputError(fmt::format("config {}/points_per_axis: must be >= 2", node.path()));
  if (!(L > 0.0)) throw InputError(fmt::format("config {}/box_length: must be positive", node.path()));
  return TorusGrid(static_cast<int>(d), L, static_cast<int>(n));
}

namespace {

std::vector<double> make_times(double t0, double t1, long n, bool log, const std::string& where) {
  if (n < 1) throw InputError(fmt::format("{}: sample count must be >= 1", where));
  if (t0 < 0.0 || t1 < t0) throw InputError(fmt::format("{}: need 0 <= t0 <= t1", where));
  if (log && !(t0 > 0.0)) throw InputError(fmt::format("{}: log spacing needs t0 > 0", where));
  std::vector<double> out;
  for (long k = 0; k < n; ++k) {
    const double f = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
    out.push_back(log ? t0 * std::pow(t1 / t0, f) : t0 + f * (t1 - t0));
  }
  return out;
}

void check_times(const std::vector<double>& t, const std::string& where) {
  if (t.empty()) throw InputError(fmt::format("{}: no times", where));
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] >= 0.0) || !std::isfinite(t[k]))
      throw InputError(fmt::format("{}: time {} is not a finite nonnegative number", where, t[k]));
    if (k > 0 && !(t[k] > t[k - 1]))
      throw InputError(fmt::format("{}: times must increase strictly", where));
  }
}

}  // namespace

std::vector<double> parse_times(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3 && parts.size() != 4)
    throw InputError(fmt::format("times '{}': expected t0:t1:n or t0:t1:n:log", text));
  try {
    const bool log = parts.size() == 4;
    if (log && parts[3] != "log")
      throw InputError(fmt::format("times '{}': fourth field must be 'log'", text));
    auto t = make_times(std::stod(parts[0]), std::stod(parts[1]), std::stol(parts[2]), log,
                        fmt::format("times '{}'", text));
    check_times(t, fmt::format("times '{}'", text));
    return t;
  } catch (const std::logic_error&) {
    throw InputError(fmt::format("times '{}': not numeric", text));
  }
}

std::vector<double> parse_times(const ConfigNode& parent, const std::string& key,
                                const std::vector<double>& fallback) {
  const std::string where = fmt::format("config {}/{}", parent.path(), key);
  if (!parent.has(key)) return fallback;
  std::vector<double> t;
  // peek at the raw type through the typed accessors
  try {
    t = parent.numbers(key);
  } catch (const InputError&) {
    try {
      t = parse_times(parent.text(key));
    } catch (const InputError&) {
      const ConfigNode node = parent.child(key);
      node.only({"t0", "t1", "n", "log"});
      t = make_times(node.number("t0"), node.number("t1"), node.integer("n"),
                     node.boolean("log", false), where);
    }
  }
  check_times(t, where);
  return t;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw InputError(fmt::format("write to {} failed", path.string()));
}

PhysicalField gaussian_field(const TorusGrid& grid, double width) {
  if (!(width > 0.0)) throw InputError(fmt::format("Gaussian width must be positive, got {}", width));
  PhysicalField f(grid, 1);
  const double c = 0.5 * grid.box_length();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.position(i);
    double r2 = 0.0;
    for (int j = 0; j < grid.dim(); ++j) r2 += (x[j] - c) * (x[j] - c);
    f.at(0, i) = std::exp(-r2 / (2.0 * width * width));
  }
  return f;
}

namespace {

RunOutput finish(const RunOptions& o, const std::string& name, const std::string& csv, Json summary,
                 std::vector<fs::path> dumps = {}) {
  RunOutput r;
  r.csv = o.out / (name + ".csv");
  r.summary = o.out / (name + "_summary.json");
  summary["command"] = name;
  write_text(r.csv, csv);
  write_text(r.summary, summary.dump(2) + "\n");
  r.summary_json = std::move(summary);
  r.dumps = std::move(dumps);
  return r;
}

PhysicalField white_noise(const TorusGrid& grid, int components, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  PhysicalField f(grid, components);
  for (double& v : f.values) v = normal(gen);
  return f;
}

// Field input: {path} of an FQLZ dump, or {generator: gaussian|spike|noise, width, seed}.
PhysicalField field_input(const ConfigNode& node, const TorusGrid& grid,
                          std::optional<std::uint64_t> seed) {
  node.only({"path", "generator", "width", "seed"});
  if (node.has("path")) {
    const fs::path p = node.text("path");
    if (!fs::exists(p))
      throw InputError(fmt::format("config {}/path: file {} does not exist", node.path(), p.string()));
    return read_field_dump(p);
  }
  const std::string gen = node.text("generator", "gaussian");
  if (gen == "gaussian") return gaussian_field(grid, node.number("width", 1.0));
  if (gen == "spike") return inverse_transform(lattice_spike(grid));
  if (gen == "noise") {
    std::mt19937_64 g(seed.value_or(node.unsigned_integer("seed", 1)));
    return white_noise(grid, 1, g);
  }
  throw InputError(fmt::format("config {}/generator: unknown generator '{}'", node.path(), gen));
}

EquilibriumState parse_equilibrium(const ConfigNode& node) {
  node.only({"n_inf", "B_inf", "gamma", "K"});
  EquilibriumState eq;
  eq.n_inf = node.number("n_inf", 1.0);
  eq.B_inf = node.vec3("B_inf", Vec3{0.0, 0.0, 0.0});
  eq.pressure.gamma = node.number("gamma", 5.0 / 3.0);
  eq.pressure.K = node.number("K", 1.0);
  try {
    validate(eq);
  } catch (const InputError& e) {
    throw InputError(fmt::format("config {}: {}", node.path(), e.what()));
  }
  return eq;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < lo || x[k] > hi) continue;
    const double a = std::log(x[k]), b = std::log(y[k]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Json fit_json(const DecayReport& r, double target) {
  return Json{{"series", r.series},
              {"window", {r.window.t1, r.window.t2}},
              {"exponent", r.exponent},
              {"intercept", r.intercept},
              {"r_squared", r.r_squared},
              {"power_law", r.power_law},
              {"samples", r.samples},
              {"saturation_time", r.saturation_time},
              {"target", target}};
}

}  // namespace

// ---- lp --------------------------------------------------------------------

RunOutput run_lp(const RunOptions& o) {
  const ConfigNode root(o.config, "");
  root.only({"grid", "lp"});
  const TorusGrid grid = parse_grid(root.child_or_empty("grid"), 3, 16.0, 32);
  const ConfigNode lp = root.child_or_empty("lp");
  lp.only({"samples", "seed", "alpha"});
  const long samples = lp.integer("samples", 100);
  const double alpha = lp.number("alpha", 1.0);
  if (samples < 1) throw InputError("config /lp/samples: must be >= 1");
  std::mt19937_64 gen(o.seed.value_or(lp.unsigned_integer("seed", 1)));

  const PartitionDefect defect = partition_defect(grid);

  PhysicalField f = white_noise(grid, 1, gen);
  SpectralField fh = forward_transform(f);
  fh.at(0, 0) = 0.0;  // homogeneous blocks miss the mean
  double recon = 0.0;
  const double fnorm = spectral_l2_norm(fh);
  for (bool hom : {false, true}) {
    SpectralField diff = decompose(fh, hom).reconstruct();
    diff -= fh;
    recon = std::max(recon, spectral_l2_norm(diff) / fnorm);
  }

  const BlockTable& table = block_table(grid, true);
  std::vector<int> usable;
  for (int q = table.range().q_min; q <= table.range().q_max; ++q)
    if (!table.entries(q).empty()) usable.push_back(q);
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
  double lo = kInf, hi = 0.0, lower = 0.0, upper = 0.0;
  for (long k = 0; k < samples; ++k) {
    const SpectralField g = forward_transform(white_noise(grid, 1, gen));
    const BernsteinReport b = bernstein_check(g, usable[pick(gen)], alpha);
    lo = std::min(lo, b.ratio);
    hi = std::max(hi, b.ratio);
    lower = b.lower;
    upper = b.upper;
  }

  std::vector<fs::path> dumps;
  if (o.dump) {
    dumps.push_back(o.out / "lp_field.fqlz");
    write_field_dump(dumps.back(), f);
  }
  std::string csv =
      "partition_defect_inhomogeneous,partition_defect_homogeneous,reconstruction_error,"
      "bernstein_min,bernstein_max,bernstein_lower,bernstein_upper,samples\n";
  csv += fmt::format("{},{},{},{},{},{},{},{}\n", num(defect.inhomogeneous), num(defect.homogeneous),
                     num(recon), num(lo), num(hi), num(lower), num(upper), samples);
  Json s{{"partition_defect_inhomogeneous", defect.inhomogeneous},
         {"partition_defect_homogeneous", defect.homogeneous},
         {"reconstruction_error", recon},
         {"bernstein_min", lo},
         {"bernstein_max", hi},
         {"bernstein_bounds", {lower, upper}},
         {"bernstein_within", lo >= lower && hi <= upper},
         {"samples", samples}};
  return finish(o, "lp", csv, std::move(s), std::move(dumps));
}

// ---- besov -----------------------------------------------------------------

RunOutput run_besov(const RunOptions& o) {
  const ConfigNode root(o.config, "");
  root.only({"grid", "spec", "input"});
  const TorusGrid grid = parse_grid(root.child_or_empty("grid"), 3, 16.0, 32);
  const ConfigNode sp = root.child_or_empty("spec");
  sp.only({"s", "p", "r", "homogeneous"});
  BesovSpec spec{sp.number("s", 0.0), sp.extended("p", 2.0), sp.extended("r", 2.0),
                 sp.boolean("homogeneous", true)};
  validate(spec);
  const PhysicalField f = field_input(root.child_or_empty("input"), grid, o.seed);
  const NormReport rep = besov_norm(f, spec);
  const std::string label =
      fmt::format("{}:{}:{}:{}", spec.s, spec.p, spec.r, spec.homogeneous ? "hom" : "inhom");
  std::string csv = "spec,value,q,contribution\n";
  for (const auto& [q, c] : rep.contributions)
    csv += fmt::format("{},{},{},{}\n", label, num(rep.value), q, num(c));
  Json contrib = Json::object();
  for (const auto& [q, c] : rep.contributions) contrib[std::to_string(q)] = c;
  Json s{{"spec", {{"s", spec.s}, {"p", spec.p}, {"r", spec.r}, {"homogeneous", spec.homogeneous}}},
         {"value", rep.value},
         {"mean", rep.mean},
         {"contributions", contrib}};
  // json cannot hold inf
  if (std::isinf(spec.p)) s["spec"]["p"] = "inf";
  if (std::isinf(spec.r)) s["spec"]["r"] = "inf";
  std::vector<fs::path> dumps;
  if (o.dump) {
    dumps.push_back(o.out / "besov_field.fqlz");
    write_field_dump(dumps.back(), f);
  }
  return finish(o, "besov", csv, std::move(s), std::move(dumps));
}

// ---- kernel ----------------------------------------------------------------

RunOutput run_kernel(const RunOptions& o) {
  const ConfigNode root(o.config, "");
  root.only({"grid", "rate", "params", "times", "input", "allow_violation"});
  const TorusGrid grid = parse_grid(root.child_or_empty("grid"), 3, 16.0, 32);

  const ConfigNode rn = root.child_or_empty("rate");
  rn.only({"a", "b", "sigma1", "sigma2", "c0"});
  DissipRate rate;
  if (rn.has("sigma1") || rn.has("sigma2")) {
    if (rn.has("a") || rn.has("b"))
      throw InputError(fmt::format("config {}: give either (a, b) or (sigma1, sigma2)", rn.path()));
    rate = DissipRate::asymptotic(rn.number("sigma1"), rn.number("sigma2"), rn.number("c0", 1.0));
  } else {
    rate = DissipRate::ab(rn.number("a", 1.0), rn.number("b", 2.0), rn.number("c0", 1.0));
  }
  validate(rate);

  const ConfigNode pn = root.child_or_empty("params");
  pn.only({"s", "ell", "rho", "r", "alpha", "q0"});
  DecayParams params;
  params.s = pn.number("s", 0.0);
  params.ell = pn.number("ell", 2.0);
  params.rho = pn.number("rho", 1.5);
  params.r = pn.number("r", 2.0);
  params.alpha = pn.extended("alpha", 2.0);
  params.q0 = static_cast<int>(pn.integer("q0", 0));

  std::vector<double> default_times{0.0};
  for (double t : make_times(0.1, 1000.0, 13, true, "default times")) default_times.push_back(t);
  const auto times = parse_times(root, "times", default_times);
  const bool allow = root.boolean("allow_violation", false);

  const PhysicalField f = field_input(root.child_or_empty("input"), grid, o.seed);
  const InequalityReport rep = verify_inequality(forward_transform(f), times, params, rate, allow);

  std::string csv = "t,lhs,low,high,ratio\n";
  for (std::size_t k = 0; k < rep.times.size(); ++k)
    csv += fmt::format("{},{},{},{},{}\n", num(rep.times[k]), num(rep.lhs[k]), num(rep.low[k]),
                       num(rep.high[k]), num(rep.ratio[k]));
  Json s{{"sup_ratio", rep.sup_ratio},
         {"gamma", rep.gamma},
         {"low_exponent", rep.low_exponent},
         {"high_exponent", rep.high_exponent},
         {"profile_rate", rep.profile_rate},
         {"hypotheses", {{"status", to_string(rep.hypotheses.status)}, {"notes", rep.hypotheses.notes}}},
         {"params",
          {{"s", params.s}, {"ell", params.ell}, {"rho", params.rho}, {"r", params.r}, {"q0", params.q0}}},
         {"rate", {{"sigma1", rate.sigma1()}, {"sigma2", rate.sigma2()}, {"c0", rate.c0}}}};
  s["params"]["alpha"] = std::isinf(params.alpha) ? Json("inf") : Json(params.alpha);
  std::vector<fs::path> dumps;
  if (o.dump) {
    dumps.push_back(o.out / "kernel_field.fqlz");
    write_field_dump(dumps.back(), f);
  }
  return finish(o, "kernel", csv, std::move(s), std::move(dumps));
}

// ---- linear ----------------------------------------------------------------

RunOutput run_linear(const RunOptions& o) {
  const ConfigNode root(o.config, "");
  root.only({"equilibrium", "linear"});
  const EquilibriumState eq = parse_equilibrium(root.child_or_empty("equilibrium"));
  const ConfigNode ln = root.child_or_empty("linear");
  ln.only({"mode", "gap", "decay"});
  const std::string mode = ln.text("mode", "gap");

  if (mode == "gap") {
    const ConfigNode g = ln.child_or_empty("gap");
    g.only({"xi_min", "xi_max", "count", "direction"});
    const double lo = g.number("xi_min", 1e-3), hi = g.number("xi_max", 1e3);
    const long count = g.integer("count", 61);
    if (!(lo > 0.0) || !(hi > lo) || count < 2)
      throw InputError(fmt::format("config {}: need 0 < xi_min < xi_max and count >= 2", g.path()));
    Vec3 dir = g.vec3("direction", Vec3{1.0, 0.0, 0.0});
    const double dn = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    if (!(dn > 0.0)) throw InputError(fmt::format("config {}/direction: zero vector", g.path()));
    for (double& d : dir) d /= dn;
    std::vector<double> r = make_times(lo, hi, count, true, "gap sweep");
    std::vector<double> c(r.size()), ratio(r.size());
    std::string csv = "xi,c,c_over_eta0\n";
    for (std::size_t k = 0; k < r.size(); ++k) {
      c[k] = spectral_gap({r[k] * dir[0], r[k] * dir[1], r[k] * dir[2]}, eq);
      ratio[k] = c[k] / eta0(r[k]);
      csv += fmt::format("{},{},{}\n", num(r[k]), num(c[k]), num(ratio[k]));
    }
    Json s{{"mode", "gap"},
           {"slope_low", log_slope(r, c, 1e-3, 1e-1)},
           {"slope_high", log_slope(r, c, 10.0, 1e3)},
           {"c_low", *std::min_element(ratio.begin(), ratio.end())},
           {"c_high", *std::max_element(ratio.begin(), ratio.end())}};
    return finish(o, "linear_gap", csv, std::move(s));
  }
  if (mode != "decay")
    throw InputError(fmt::format("config {}/mode: expected 'gap' or 'decay', got '{}'", ln.path(), mode));

  const ConfigNode d = ln.child_or_empty("decay");
  d.only({"data", "sigma", "ell", "high_onset", "times", "fit_window", "r_min", "r_max", "panels",
          "radial_points", "polar_points", "azimuth_points"});
  ContinuumDecayConfig cfg;
  cfg.eq = eq;
  const std::string data = d.text("data", "gaussian");
  if (data == "gaussian")
    cfg.data = DecayData::Gaussian;
  else if (data == "high_frequency")
    cfg.data = DecayData::HighFrequency;
  else
    throw InputError(fmt::format("config {}/data: expected 'gaussian' or 'high_frequency'", d.path()));
  const bool gauss = cfg.data == DecayData::Gaussian;
  cfg.sigma = d.number("sigma", 2.0);
  cfg.ell = d.number("ell", 1.0);
  cfg.high_onset = d.number("high_onset", 10.0);
  cfg.r_min = d.number("r_min", 0.0);
  cfg.r_max = d.number("r_max", 0.0);
  cfg.panels = static_cast<int>(d.integer("panels", 40));
  cfg.radial_points = static_cast<int>(d.integer("radial_points", 8));
  cfg.polar_points = static_cast<int>(d.integer("polar_points", 10));
  cfg.azimuth_points = static_cast<int>(d.integer("azimuth_points", 12));
  cfg.times = parse_times(d, "times",
                          gauss ? make_times(1.0, 1e3, 31, true, "") : make_times(1e2, 1e5, 31, true, ""));
  FitWindow window = gauss ? FitWindow{10.0, 1e3} : FitWindow{1e3, 1e5};
  if (d.has("fit_window")) {
    const auto w = d.numbers("fit_window");
    if (w.size() != 2) throw InputError(fmt::format("config {}/fit_window: expected [t1, t2]", d.path()));
    window = {w[0], w[1]};
  }
  const ContinuumDecayResult res = continuum_decay(cfg);
  std::string csv = "t,L2,dL2,d2L2\n";
  for (std::size_t k = 0; k < res.times.size(); ++k)
    csv += fmt::format("{},{},{},{}\n", num(res.times[k]), num(res.norms[0][k]),
                       num(res.norms[1][k]), num(res.norms[2][k]));
  Json fits = Json::array();
  const char* names[3] = {"L2", "dL2", "d2L2"};
  for (int k = 0; k < 3; ++k) {
    if (!gauss && k > 0) break;
    const DecayReport fr = fit_decay_exponent(res.times, res.norms[k], window, names[k]);
    fits.push_back(fit_json(fr, gauss ? -0.75 - 0.5 * k : -0.5 * cfg.ell));
  }
  Json s{{"mode", "decay"},
         {"data", data},
         {"fits", fits},
         {"r_min", res.r_min},
         {"r_max", res.r_max},
         {"fallback_modes", res.fallback_modes}};
  return finish(o, "linear_decay", csv, std::move(s));
}

// ---- nonlinear -------------------------------------------------------------

RunOutput run_nonlinear(const RunOptions& o) {
  const ConfigNode root(o.config, "");
  root.only({"grid", "equilibrium", "init", "stepper", "experiment"});
  ExperimentSettings st;
  st.grid = parse_grid(root.child_or_empty("grid"), 3, 100.0, 32);
  st.eq = parse_equilibrium(root.child_or_empty("equilibrium"));

  const ConfigNode in = root.child_or_empty("init");
  in.only({"seed", "amplitude", "profile"});
  st.seed = o.seed.value_or(in.unsigned_integer("seed", 1));
  st.amplitude = in.number("amplitude", 1e-2);
  const ConfigNode pr = in.child_or_empty("profile");
  pr.only({"width", "cutoff"});
  st.profile.width = pr.number("width", 0.25);
  st.profile.cutoff = pr.number("cutoff", 0.0);

  const ConfigNode sn = root.child_or_empty("stepper");
  sn.only({"cfl", "dt", "dealias"});
  st.stepper.cfl = sn.number("cfl", 0.5);
  st.stepper.dt = sn.number("dt", 0.0);
  st.stepper.dealias = sn.boolean("dealias", true);

  const ConfigNode ex = root.child_or_empty("experiment");
  ex.only({"T", "stride", "fit_window", "duhamel"});
  st.T = ex.number("T", 100.0);
  st.stride = ex.integer("stride", 10);
  if (ex.has("fit_window")) {
    const auto w = ex.numbers("fit_window");
    if (w.size() != 2)
      throw InputError(fmt::format("config {}/fit_window: expected [t1, t2]", ex.path()));
    st.fit_window = {w[0], w[1]};
  }
  st.duhamel = ex.boolean("duhamel", false);

  const ExperimentResult res = decay_experiment(st);

  std::string csv = "t,l2,N,D,N0,D0,resE,resB\n";
  for (const auto& r : res.rows)
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", num(r.t), num(r.l2), num(r.energy.N),
                       num(r.energy.D), num(r.energy.N0), num(r.energy.D0),
                       num(r.constraint.div_e_rho), num(r.constraint.div_h));
  double max_res = 0.0;
  for (const auto& r : res.rows)
    if (r.constraint.z_norm > 0.0)
      max_res = std::max(max_res, std::max(r.constraint.div_e_rho, r.constraint.div_h) /
                                      r.constraint.z_norm);
  Json s{{"fits", Json::array({fit_json(res.fit, -0.75)})},
         {"exponent", res.fit.exponent},
         {"window", {res.fit.window.t1, res.fit.window.t2}},
         {"r_squared", res.fit.r_squared},
         {"I1", res.init.I1},
         {"b52", res.init.b52},
         {"negative_norm", res.init.neg},
         {"seed", st.seed},
         {"amplitude", st.amplitude},
         {"dt", res.integration.dt},
         {"steps", res.integration.steps},
         {"n_ratio", res.n_ratio},
         {"max_relative_constraint_residual", max_res},
         {"saturation_time", res.fit.saturation_time}};
  if (res.duhamel)
    s["duhamel"] = {{"found", res.duhamel->found},
                    {"c1", res.duhamel->c1},
                    {"C", res.duhamel->C},
                    {"modes", res.duhamel->modes}};
  std::vector<fs::path> dumps;
  if (o.dump) {
    const SimState z0 = initial_data_gen(st.grid, st.eq, st.seed, st.amplitude, st.profile);
    dumps.push_back(o.out / "nonlinear_initial.fqlz");
    write_field_dump(dumps.back(), inverse_transform(z0.z));
    dumps.push_back(o.out / "nonlinear_final.fqlz");
    write_field_dump(dumps.back(), inverse_transform(res.final_state->z));
  }
  return finish(o, "nonlinear", csv, std::move(s), std::move(dumps));
}

// ---- report ----------------------------------------------------------------

RunOutput run_report(const std::vector<fs::path>& summaries, const fs::path& out) {
  if (summaries.empty()) throw InputError("report: no summary files given");
  std::string csv = "run,command,series,exponent,target,deviation,r_squared\n";
  Json rows = Json::array();
  for (const auto& p : summaries) {
    const Json j = load_config(p);
    if (!j.is_object() || !j.contains("command") || !j["command"].is_string())
      throw InputError(fmt::format("report: {} is not a run summary (no command)", p.string()));
    if (!j.contains("fits") || !j["fits"].is_array() || j["fits"].empty())
      throw InputError(fmt::format("report: {} carries no fitted exponents", p.string()));
    for (std::size_t k = 0; k < j["fits"].size(); ++k) {
      const Json& f = j["fits"][k];
      for (const char* key : {"exponent", "target"})
        if (!f.contains(key) || !f[key].is_number())
          throw InputError(fmt::format("report: {} /fits/{}/{} missing", p.string(), k, key));
      const double e = f["exponent"].get<double>(), t = f["target"].get<double>();
      const double r2 = f.value("r_squared", std::numeric_limits<double>::quiet_NaN());
      const std::string series = f.value("series", "");
      csv += fmt::format("{},{},{},{},{},{},{}\n", p.string(), j["command"].get<std::string>(),
                         series, num(e), num(t), num(e - t), num(r2));
      rows.push_back({{"run", p.string()},
                      {"series", series},
                      {"exponent", e},
                      {"target", t},
                      {"deviation", e - t}});
    }
  }
  RunOptions o;
  o.out = out;
  return finish(o, "report", csv, Json{{"rows", rows}});
}

}  // namespace frequalize
