#include "frequalize/besov.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "frequalize/equilibrium.hpp"
#include "frequalize/error.hpp"
#include "frequalize/parallel.hpp"

namespace frequalize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inverse(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

// Unweighted ||Delta_q f||_{L^p} over the active range, indexed from q_min.
std::vector<double> block_lp_norms(const SpectralField& f, double p, bool homogeneous) {
  const BlockTable& table = block_table(f.grid, homogeneous);
  if (p == 2.0) return table.l2_norms(f, 0, f.components);
  const auto range = table.range();
  std::vector<double> out(static_cast<std::size_t>(range.count()), 0.0);
  for (int q = range.q_min; q <= range.q_max; ++q) {
    const auto& entries = table.entries(q);
    if (entries.empty()) continue;
    SpectralField b(f.grid, f.components);
    for (const auto& e : entries)
      for (int c = 0; c < f.components; ++c) b.at(c, e.index) = e.weight * f.at(c, e.index);
    // roundoff in f is absolute; a small block can carry a large relative Hermitian defect
    for (const auto& e : entries) {
      const std::size_t m = f.grid.mirror(e.index);
      if (m < e.index) continue;
      for (int c = 0; c < f.components; ++c) {
        const Complex h = 0.5 * (b.at(c, e.index) + std::conj(b.at(c, m)));
        b.at(c, e.index) = h;
        b.at(c, m) = std::conj(h);
      }
    }
    out[static_cast<std::size_t>(q - range.q_min)] = lp_norm(inverse_transform(b), p);
  }
  return out;
}

std::map<int, double> weighted(const std::vector<double>& norms, int q_min, double s) {
  std::map<int, double> out;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    const int q = q_min + static_cast<int>(k);
    out[q] = std::exp2(q * s) * norms[k];
  }
  return out;
}

void check_series(const FieldSeries& series) {
  if (series.times.size() != series.samples.size())
    throw InputError(fmt::format("time series has {} stamps but {} samples", series.times.size(),
                                 series.samples.size()));
  if (series.times.size() < 2)
    throw InputError("time norms need at least 2 samples");
  for (std::size_t k = 1; k < series.times.size(); ++k) {
    if (!(series.times[k] > series.times[k - 1]))
      throw InputError(fmt::format("sample times must increase strictly (index {})", k));
    if (!(series.samples[k].grid == series.samples[0].grid) ||
        series.samples[k].components != series.samples[0].components)
      throw InputError(fmt::format("sample {} does not match the layout of sample 0", k));
  }
}

double hom_norm(const PhysicalField& f, double s, double p, double r) {
  return besov_norm(f, BesovSpec{s, p, r, true}).value;
}

PhysicalField product(const PhysicalField& f, const PhysicalField& g) {
  if (!(f.grid == g.grid)) throw InputError("probe pair lives on different grids");
  if (f.components != 1 || g.components != 1)
    throw InputError("product probes need scalar fields");
  PhysicalField out(f.grid, 1);
  for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = f.values[i] * g.values[i];
  return out;
}

PhysicalField minus_mean(const PhysicalField& f) {
  PhysicalField out = f;
  const auto means = spectral_mean(forward_transform(f));
  for (int c = 0; c < f.components; ++c)
    for (std::size_t i = 0; i < f.grid.size(); ++i) out.at(c, i) -= means[static_cast<std::size_t>(c)];
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw HypothesisError("hypothesis violated: " + what);
}

}  // namespace

void validate(const BesovSpec& spec) {
  if (!(spec.p >= 1.0)) throw InputError(fmt::format("Besov p must be >= 1 (got {})", spec.p));
  if (!(spec.r >= 1.0)) throw InputError(fmt::format("Besov r must be >= 1 (got {})", spec.r));
  if (!std::isfinite(spec.s)) throw InputError("Besov s must be finite");
}

double lr_aggregate(const std::map<int, double>& terms, double r) {
  if (std::isinf(r)) {
    double m = 0.0;
    for (const auto& [q, v] : terms) m = std::max(m, v);
    return m;
  }
  CompensatedSum sum;
  if (r == 1.0) {
    for (const auto& [q, v] : terms) sum.add(v);
    return sum.value();
  }
  for (const auto& [q, v] : terms) sum.add(std::pow(v, r));
  return std::pow(sum.value(), 1.0 / r);
}

NormReport besov_norm(const SpectralField& f, const BesovSpec& spec) {
  validate(spec);
  const auto range = active_blocks(f.grid, spec.homogeneous);
  NormReport rep;
  rep.spec = spec;
  rep.contributions = weighted(block_lp_norms(f, spec.p, spec.homogeneous), range.q_min, spec.s);
  rep.value = lr_aggregate(rep.contributions, spec.r);
  rep.mean = spectral_mean(f);
  return rep;
}

NormReport besov_norm(const PhysicalField& f, const BesovSpec& spec) {
  return besov_norm(forward_transform(f), spec);
}

double negative_norm(const SpectralField& f, double rho) {
  if (!(rho > 0.0)) throw InputError(fmt::format("negative-order index must be > 0 (got {})", rho));
  return besov_norm(f, BesovSpec{-rho, 2.0, kInf, true}).value;
}

double negative_norm(const PhysicalField& f, double rho) {
  return negative_norm(forward_transform(f), rho);
}

double time_norm(const std::vector<double>& times, const std::vector<double>& g, double theta) {
  if (times.size() != g.size() || times.size() < 2)
    throw InputError("time_norm needs matching stamps and at least 2 samples");
  if (!(theta >= 1.0)) throw InputError(fmt::format("time exponent must be >= 1 (got {})", theta));
  if (std::isinf(theta)) return *std::max_element(g.begin(), g.end());
  CompensatedSum sum;
  for (std::size_t k = 1; k < g.size(); ++k)
    sum.add(0.5 * (times[k] - times[k - 1]) * (std::pow(g[k - 1], theta) + std::pow(g[k], theta)));
  return std::pow(std::max(sum.value(), 0.0), 1.0 / theta);
}

namespace {

CheminLernerReport tilde_norm_on(const std::vector<double>& times,
                                 const std::vector<std::vector<double>>& blocks, int q_min,
                                 const CheminLernerSpec& spec) {
  CheminLernerReport rep;
  rep.spec = spec;
  const std::size_t nq = blocks.front().size();
  for (std::size_t b = 0; b < nq; ++b) {
    std::vector<double> g(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) g[k] = blocks[k][b];
    const int q = q_min + static_cast<int>(b);
    rep.contributions[q] = std::exp2(q * spec.besov.s) * time_norm(times, g, spec.theta);
  }
  rep.value = lr_aggregate(rep.contributions, spec.besov.r);
  return rep;
}

}  // namespace

CheminLernerReport chemin_lerner_norm(const FieldSeries& series, const CheminLernerSpec& spec) {
  validate(spec.besov);
  check_series(series);
  if (!(spec.theta >= 1.0))
    throw InputError(fmt::format("time exponent must be >= 1 (got {})", spec.theta));
  const auto range = active_blocks(series.samples[0].grid, spec.besov.homogeneous);
  std::vector<std::vector<double>> blocks(series.samples.size());
  parallel_for(blocks.size(), [&](std::size_t k) {
    blocks[k] = block_lp_norms(series.samples[k], spec.besov.p, spec.besov.homogeneous);
  });
  CheminLernerReport rep = tilde_norm_on(series.times, blocks, range.q_min, spec);

  // every other sample, keeping both endpoints
  const std::size_t n = series.times.size();
  if (n < 3) {
    rep.under_resolved = true;
    return rep;
  }
  std::vector<double> coarse_t;
  std::vector<std::vector<double>> coarse_b;
  for (std::size_t k = 0; k < n; k += 2) {
    coarse_t.push_back(series.times[k]);
    coarse_b.push_back(blocks[k]);
  }
  if (coarse_t.back() != series.times.back()) {
    coarse_t.push_back(series.times.back());
    coarse_b.push_back(blocks.back());
  }
  const double coarse = tilde_norm_on(coarse_t, coarse_b, range.q_min, spec).value;
  rep.refinement_change = rep.value > 0.0 ? std::abs(rep.value - coarse) / rep.value : 0.0;
  rep.under_resolved = rep.refinement_change > 0.01;
  return rep;
}

double mixed_norm(const FieldSeries& series, const CheminLernerSpec& spec) {
  validate(spec.besov);
  check_series(series);
  std::vector<double> values(series.samples.size());
  parallel_for(values.size(), [&](std::size_t k) {
    values[k] = besov_norm(series.samples[k], spec.besov).value;
  });
  return time_norm(series.times, values, spec.theta);
}

std::string to_string(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::Embedding: return "embedding";
    case ProbeKind::SupEmbedding: return "sup_embedding";
    case ProbeKind::Algebra: return "algebra";
    case ProbeKind::CriticalProduct: return "critical_product";
    case ProbeKind::Moser: return "moser";
    case ProbeKind::NegativeEmbedding: return "negative_embedding";
  }
  return "unknown";
}

ProbeKind probe_kind_from_string(const std::string& name) {
  for (auto k : {ProbeKind::Embedding, ProbeKind::SupEmbedding, ProbeKind::Algebra,
                 ProbeKind::CriticalProduct, ProbeKind::Moser, ProbeKind::NegativeEmbedding})
    if (to_string(k) == name) return k;
  throw InputError(fmt::format("unknown inequality probe '{}'", name));
}

ProbeReport inequality_probe(ProbeKind kind, const ProbeParams& pp,
                             const std::vector<ProbePair>& samples) {
  if (samples.empty()) throw InputError("inequality_probe needs at least one sample");
  const double n = samples.front().f.grid.dim();

  switch (kind) {
    case ProbeKind::Embedding:
      require(pp.p >= 1.0 && pp.p <= pp.p_target, "embedding needs 1 <= p <= p_target");
      require(pp.r >= 1.0, "embedding needs r >= 1");
      break;
    case ProbeKind::SupEmbedding:
      require(pp.p >= 1.0 && std::isfinite(pp.p), "sup embedding needs 1 <= p < inf");
      break;
    case ProbeKind::Algebra:
      require(pp.s > 0.0, "algebra estimate needs s > 0");
      require(pp.p >= 1.0 && pp.r >= 1.0, "algebra estimate needs p, r >= 1");
      break;
    case ProbeKind::CriticalProduct:
      require(pp.s1 <= n / pp.p && pp.s2 <= n / pp.p, "critical product needs s1, s2 <= n/p");
      require(pp.s1 + pp.s2 > n * std::max(0.0, 2.0 / pp.p - 1.0),
              "critical product needs s1 + s2 > n max(0, 2/p - 1)");
      break;
    case ProbeKind::Moser:
      require(pp.s > 0.0, "Moser estimate needs s > 0");
      require(std::abs(inverse(pp.p) - inverse(pp.p1) - inverse(pp.p2)) < 1e-12,
              "Moser estimate needs 1/p = 1/p1 + 1/p2");
      require(std::abs(inverse(pp.p) - inverse(pp.p3) - inverse(pp.p4)) < 1e-12,
              "Moser estimate needs 1/p = 1/p3 + 1/p4");
      break;
    case ProbeKind::NegativeEmbedding:
      require(pp.rho > 0.0, "negative embedding needs rho > 0");
      require(pp.p >= 1.0 && pp.p < 2.0, "negative embedding needs 1 <= p < 2");
      require(1.0 / pp.p - pp.rho / n > 0.0, "negative embedding needs 1/p - rho/n > 0");
      break;
  }

  ProbeReport rep;
  rep.kind = kind;
  for (const auto& pair : samples) {
    const PhysicalField& f = pair.f;
    const PhysicalField& g = pair.g;
    double lhs = 0.0, rhs = 0.0;
    switch (kind) {
      case ProbeKind::Embedding:
        lhs = hom_norm(f, pp.s - n * (1.0 / pp.p - inverse(pp.p_target)), pp.p_target, pp.r);
        rhs = hom_norm(f, pp.s, pp.p, pp.r);
        break;
      case ProbeKind::SupEmbedding:
        lhs = lp_norm(minus_mean(f), kInf);
        rhs = hom_norm(f, n / pp.p, pp.p, 1.0);
        break;
      case ProbeKind::Algebra:
        lhs = hom_norm(product(f, g), pp.s, pp.p, pp.r);
        rhs = lp_norm(f, kInf) * hom_norm(g, pp.s, pp.p, pp.r) +
              lp_norm(g, kInf) * hom_norm(f, pp.s, pp.p, pp.r);
        break;
      case ProbeKind::CriticalProduct:
        lhs = hom_norm(product(f, g), pp.s1 + pp.s2 - n / pp.p, pp.p, 1.0);
        rhs = hom_norm(f, pp.s1, pp.p, 1.0) * hom_norm(g, pp.s2, pp.p, 1.0);
        break;
      case ProbeKind::Moser:
        lhs = hom_norm(product(f, g), pp.s, pp.p, pp.r);
        rhs = lp_norm(f, pp.p1) * hom_norm(g, pp.s, pp.p2, pp.r) +
              lp_norm(g, pp.p3) * hom_norm(f, pp.s, pp.p4, pp.r);
        break;
      case ProbeKind::NegativeEmbedding: {
        const double target = 1.0 / (1.0 / pp.p - pp.rho / n);
        lhs = hom_norm(f, -pp.rho, target, kInf);
        rhs = lp_norm(f, pp.p);
        break;
      }
    }
    const double ratio = lhs == 0.0 ? 0.0 : (rhs > 0.0 ? lhs / rhs : kInf);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

EnergyTracker::EnergyTracker(const TorusGrid& grid) : table_(&block_table(grid, false)) {
  sup_blocks_.assign(static_cast<std::size_t>(table_->range().count()), 0.0);
}

void EnergyTracker::advance(Term& term, const std::vector<double>& blocks, double dt) {
  const int q_min = table_->range().q_min;
  double besov = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    besov += std::exp2((q_min + static_cast<int>(b)) * term.s) * blocks[b];
  if (term.prev.empty()) {
    term.tilde_sq.assign(blocks.size(), 0.0);
  } else {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      term.tilde_sq[b] += 0.5 * dt * (term.prev[b] * term.prev[b] + blocks[b] * blocks[b]);
    term.plain_sq += 0.5 * dt * (term.prev_besov * term.prev_besov + besov * besov);
  }
  term.prev = blocks;
  term.prev_besov = besov;
}

double EnergyTracker::tilde_value(const Term& term) const {
  const int q_min = table_->range().q_min;
  double v = 0.0;
  for (std::size_t b = 0; b < term.tilde_sq.size(); ++b)
    v += std::exp2((q_min + static_cast<int>(b)) * term.s) * std::sqrt(term.tilde_sq[b]);
  return v;
}

EnergyValues EnergyTracker::push(double t, const SpectralField& z) {
  if (z.components != slot::kCount)
    throw InputError(fmt::format("energy functionals need the 10-component state, got {}",
                                 z.components));
  if (!(z.grid == table_->grid())) throw InputError("energy tracker: grid changed mid-series");
  if (started_ && !(t > prev_t_))
    throw InputError(fmt::format("energy tracker: time {} does not advance past {}", t, prev_t_));
  const double dt = started_ ? t - prev_t_ : 0.0;

  const auto all = table_->l2_norms(z, 0, slot::kCount);
  const int q_min = table_->range().q_min;
  double n0 = 0.0;
  for (std::size_t b = 0; b < all.size(); ++b) {
    sup_blocks_[b] = std::max(sup_blocks_[b], all[b]);
    n0 += std::exp2((q_min + static_cast<int>(b)) * 2.5) * sup_blocks_[b];
  }
  advance(rho_u_, table_->l2_norms(z, slot::kRho, 4), dt);
  advance(electric_, table_->l2_norms(z, slot::kElectric, 3), dt);
  advance(grad_h_, table_->l2_norms(z, slot::kMagnetic, 3, 1.0), dt);

  const double weighted_l2 = std::pow(1.0 + t, 0.75) * spectral_l2_norm(z);
  current_.t = t;
  current_.N0 = n0;
  current_.D0 = tilde_value(rho_u_) + tilde_value(electric_) + tilde_value(grad_h_);
  current_.N = std::max(started_ ? current_.N : 0.0, weighted_l2);
  current_.D = std::sqrt(rho_u_.plain_sq) + std::sqrt(electric_.plain_sq) +
               std::sqrt(grad_h_.plain_sq);
  started_ = true;
  prev_t_ = t;
  return current_;
}

std::vector<EnergyValues> energy_functionals(const FieldSeries& series) {
  if (series.times.size() != series.samples.size() || series.samples.empty())
    throw InputError("energy_functionals needs a non-empty, consistently stamped series");
  EnergyTracker tracker(series.samples.front().grid);
  std::vector<EnergyValues> out;
  for (std::size_t k = 0; k < series.samples.size(); ++k)
    out.push_back(tracker.push(series.times[k], series.samples[k]));
  return out;
}

}  // namespace frequalize
