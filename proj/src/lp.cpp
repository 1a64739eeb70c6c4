#include "frequalize/lp.hpp"

#include <fmt/format.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <tuple>

#include "frequalize/error.hpp"
#include "frequalize/parallel.hpp"

namespace frequalize {

namespace {

double exp_ramp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

}  // namespace

RadialCutoffs::RadialCutoffs(TransitionProfile profile) : profile_(profile) {
  const double a = profile.inner_radius, b = profile.outer_radius;
  if (!(a > 0.0) || !(b > a) || !(b <= 2.0 * a))
    throw InputError(fmt::format(
        "cutoff radii must satisfy 0 < inner < outer <= 2 inner (got {}, {})", a, b));
}

double RadialCutoffs::chi(double r) const {
  const double a = profile_.inner_radius, b = profile_.outer_radius;
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  const double t = (b - r) / (b - a);
  const double up = exp_ramp(t), down = exp_ramp(1.0 - t);
  return up / (up + down);
}

RadialCutoffs build_cutoffs(TransitionProfile profile) { return RadialCutoffs(profile); }

const RadialCutoffs& default_cutoffs() {
  static const RadialCutoffs instance{};
  return instance;
}

double block_multiplier(const RadialCutoffs& cutoffs, double r, int q, bool homogeneous) {
  if (!homogeneous) {
    if (q <= -2) return 0.0;
    if (q == -1) return cutoffs.chi(r);
  }
  return cutoffs.phi(std::ldexp(r, -q));
}

BlockIndexRange active_blocks(const TorusGrid& grid, bool homogeneous) {
  const int q_max =
      static_cast<int>(std::floor(std::log2(4.0 * grid.xi_max() / 3.0))) + 1;
  if (!homogeneous) return {-1, std::max(q_max, -1)};
  const int q_min = static_cast<int>(std::ceil(std::log2(3.0 * grid.xi_min() / 8.0))) - 1;
  return {q_min, q_max};
}

SpectralField block(const SpectralField& f, int q, bool homogeneous,
                    const RadialCutoffs& cutoffs) {
  SpectralField out(f.grid, f.components);
  if (!homogeneous && q <= -2) return out;
  const std::size_t n = f.grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 xi = f.grid.frequency(i);
    const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    const double m = block_multiplier(cutoffs, r, q, homogeneous);
    if (m == 0.0) continue;
    for (int c = 0; c < f.components; ++c) out.at(c, i) = m * f.at(c, i);
  }
  return out;
}

SpectralField LPDecomposition::reconstruct() const {
  if (blocks.empty()) throw InputError("empty decomposition");
  SpectralField sum(blocks.begin()->second.grid, blocks.begin()->second.components);
  for (const auto& [q, b] : blocks) sum += b;
  return sum;
}

LPDecomposition decompose(const SpectralField& f, bool homogeneous,
                          const RadialCutoffs& cutoffs) {
  LPDecomposition out{homogeneous, active_blocks(f.grid, homogeneous), {}};
  for (int q = out.range.q_min; q <= out.range.q_max; ++q)
    out.blocks.emplace(q, block(f, q, homogeneous, cutoffs));
  return out;
}

BernsteinReport bernstein_check(const SpectralField& f, int q, double alpha,
                                const RadialCutoffs& cutoffs) {
  CompensatedSum weighted, plain;
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    const Vec3 xi = f.grid.frequency(i);
    const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    const double m = cutoffs.phi(std::ldexp(r, -q));
    if (m == 0.0) continue;
    double e = 0.0;
    for (int c = 0; c < f.components; ++c) e += std::norm(m * f.at(c, i));
    plain.add(e);
    weighted.add(std::pow(r, 2.0 * alpha) * e);
  }
  if (plain.value() == 0.0)
    throw InputError(fmt::format("bernstein_check: block {} is identically zero, ratio undefined", q));
  const double ratio = std::sqrt(weighted.value() / plain.value()) / std::pow(2.0, q * alpha);
  return {q, alpha, ratio, std::pow(cutoffs.shell_inner(), alpha),
          std::pow(cutoffs.shell_outer(), alpha)};
}

BlockTable::BlockTable(const TorusGrid& grid, bool homogeneous, const RadialCutoffs& cutoffs)
    : grid_(grid), homogeneous_(homogeneous), range_(active_blocks(grid, homogeneous)) {
  entries_.resize(static_cast<std::size_t>(range_.count()));
  const auto radii = grid.frequency_magnitudes();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    for (int q = range_.q_min; q <= range_.q_max; ++q) {
      const double m = block_multiplier(cutoffs, radii[i], q, homogeneous);
      if (m != 0.0)
        entries_[static_cast<std::size_t>(q - range_.q_min)].push_back(
            {static_cast<std::uint32_t>(i), m});
    }
  }
}

const std::vector<BlockTable::Entry>& BlockTable::entries(int q) const {
  if (q < range_.q_min || q > range_.q_max)
    throw InputError(fmt::format("block index {} outside active range [{}, {}]", q,
                                 range_.q_min, range_.q_max));
  return entries_[static_cast<std::size_t>(q - range_.q_min)];
}

std::vector<double> BlockTable::l2_norms(const SpectralField& f, int first, int count,
                                         double power) const {
  if (!(f.grid == grid_)) throw InputError("BlockTable: field lives on a different grid");
  if (first < 0 || count < 1 || first + count > f.components)
    throw InputError(fmt::format("BlockTable: component range [{}, {}) outside field with {} components",
                                 first, first + count, f.components));
  const double inv_volume = 1.0 / grid_.volume();
  std::vector<double> out(entries_.size(), 0.0);
  parallel_for(entries_.size(), [&](std::size_t b) {
    CompensatedSum sum;
    for (const auto& e : entries_[b]) {
      double energy = 0.0;
      for (int c = first; c < first + count; ++c) energy += std::norm(f.at(c, e.index));
      if (power != 0.0) {
        const Vec3 xi = grid_.frequency(e.index);
        energy *= std::pow(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2], power);
      }
      sum.add(e.weight * e.weight * energy);
    }
    out[b] = std::sqrt(std::max(sum.value(), 0.0) * inv_volume);
  });
  return out;
}

const BlockTable& block_table(const TorusGrid& grid, bool homogeneous) {
  using Key = std::tuple<int, double, int, bool>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<BlockTable>> cache;
  const Key key{grid.dim(), grid.box_length(), grid.points_per_axis(), homogeneous};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<BlockTable>(grid, homogeneous)).first;
  return *it->second;
}

PartitionDefect partition_defect(const TorusGrid& grid, const RadialCutoffs& cutoffs) {
  const auto hom = active_blocks(grid, true);
  const auto inhom = active_blocks(grid, false);
  PartitionDefect d{0.0, 0.0};
  const auto radii = grid.frequency_magnitudes();
  for (double r : radii) {
    double s = 0.0;
    for (int q = inhom.q_min; q <= inhom.q_max; ++q) s += block_multiplier(cutoffs, r, q, false);
    d.inhomogeneous = std::max(d.inhomogeneous, std::abs(s - 1.0));
    if (r == 0.0) continue;
    double h = 0.0;
    for (int q = hom.q_min; q <= hom.q_max; ++q) h += block_multiplier(cutoffs, r, q, true);
    d.homogeneous = std::max(d.homogeneous, std::abs(h - 1.0));
  }
  return d;
}

}  // namespace frequalize
