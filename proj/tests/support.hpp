#pragma once

#include <random>

#include "frequalize/grid.hpp"

namespace fqt {

inline frequalize::PhysicalField noise(const frequalize::TorusGrid& g, int comps,
                                       std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  frequalize::PhysicalField f(g, comps);
  for (double& v : f.values) v = nd(gen);
  return f;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fqt
