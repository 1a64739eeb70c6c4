#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "frequalize/grid.hpp"

namespace frequalize {

/// Radii of the smooth step of chi: chi = 1 on |xi| <= inner, 0 on |xi| >= outer.
/// phi(xi) = chi(xi/2) - chi(xi) is then supported in [inner, 2 * outer].
struct TransitionProfile {
  double inner_radius = 0.75;
  double outer_radius = 4.0 / 3.0;
};

/// The dyadic partition of unity (chi, phi) with a C-infinity exp(-1/t) ramp.
class RadialCutoffs {
public:
  explicit RadialCutoffs(TransitionProfile profile = {});

  [[nodiscard]] double chi(double r) const;
  [[nodiscard]] double phi(double r) const { return chi(0.5 * r) - chi(r); }

  [[nodiscard]] double shell_inner() const { return profile_.inner_radius; }
  [[nodiscard]] double shell_outer() const { return 2.0 * profile_.outer_radius; }
  [[nodiscard]] double ball_radius() const { return profile_.outer_radius; }

private:
  TransitionProfile profile_;
};

RadialCutoffs build_cutoffs(TransitionProfile profile = {});

/// Shared instance with the standard 3/4, 4/3 geometry.
const RadialCutoffs& default_cutoffs();

/// Multiplier of block q at radius r: phi(2^-q r) for homogeneous blocks; for
/// the inhomogeneous family chi(r) at q = -1, zero for q <= -2.
double block_multiplier(const RadialCutoffs& cutoffs, double r, int q, bool homogeneous);

/// Finite set of block indices that can be nonzero on a lattice, with one
/// always-empty guard index at each end of the homogeneous range.
struct BlockIndexRange {
  int q_min;
  int q_max;

  [[nodiscard]] int count() const { return q_max - q_min + 1; }
};

BlockIndexRange active_blocks(const TorusGrid& grid, bool homogeneous);

/// Delta_q f (or its homogeneous counterpart) by coefficientwise multiplication.
SpectralField block(const SpectralField& f, int q, bool homogeneous,
                    const RadialCutoffs& cutoffs = default_cutoffs());

struct LPDecomposition {
  bool homogeneous;
  BlockIndexRange range;
  std::map<int, SpectralField> blocks;

  /// Sum of all blocks; f (homogeneous: f minus its mean) up to roundoff.
  [[nodiscard]] SpectralField reconstruct() const;
};

LPDecomposition decompose(const SpectralField& f, bool homogeneous,
                          const RadialCutoffs& cutoffs = default_cutoffs());

/// ||Lambda^alpha Delta_q f||_2 / (2^{q alpha} ||Delta_q f||_2) and the shell
/// bounds [(3/4)^alpha, (8/3)^alpha] it must lie in.
struct BernsteinReport {
  int q;
  double alpha;
  double ratio;
  double lower;
  double upper;

  [[nodiscard]] bool within_bounds() const { return ratio >= lower && ratio <= upper; }
};

BernsteinReport bernstein_check(const SpectralField& f, int q, double alpha = 1.0,
                                const RadialCutoffs& cutoffs = default_cutoffs());

/// Largest |chi + sum phi - 1| (inhomogeneous) and |sum phi - 1| (homogeneous,
/// xi != 0) over the lattice.
struct PartitionDefect {
  double inhomogeneous;
  double homogeneous;
};

/// Per-block lists of (lattice index, multiplier) with nonzero multiplier.
/// Built once per grid and reused by every norm evaluation.
class BlockTable {
public:
  struct Entry {
    std::uint32_t index;
    double weight;
  };

  BlockTable(const TorusGrid& grid, bool homogeneous,
             const RadialCutoffs& cutoffs = default_cutoffs());

  [[nodiscard]] const TorusGrid& grid() const { return grid_; }
  [[nodiscard]] bool homogeneous() const { return homogeneous_; }
  [[nodiscard]] BlockIndexRange range() const { return range_; }
  [[nodiscard]] const std::vector<Entry>& entries(int q) const;

  /// ||Delta_q f||_{L^2} for every active q, using components [first, first + count)
  /// and an optional extra per-mode weight |xi|^{2 * power} (power = 0: none).
  [[nodiscard]] std::vector<double> l2_norms(const SpectralField& f, int first, int count,
                                             double power = 0.0) const;

private:
  TorusGrid grid_;
  bool homogeneous_;
  BlockIndexRange range_;
  std::vector<std::vector<Entry>> entries_;
};

/// Cached table for the default cutoffs; thread-safe.
const BlockTable& block_table(const TorusGrid& grid, bool homogeneous);

PartitionDefect partition_defect(const TorusGrid& grid,
                                 const RadialCutoffs& cutoffs = default_cutoffs());

}  // namespace frequalize
