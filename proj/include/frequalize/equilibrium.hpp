#pragma once

#include <cmath>

#include "frequalize/grid.hpp"

namespace frequalize {

/// Slot layout of the perturbation z = (rho, upsilon, E, h).
namespace slot {
inline constexpr int kRho = 0;
inline constexpr int kUpsilon = 1;
inline constexpr int kElectric = 4;
inline constexpr int kMagnetic = 7;
inline constexpr int kCount = 10;
}  // namespace slot

/// gamma-law p(n) = K n^gamma.
struct PressureLaw {
  double K = 1.0;
  double gamma = 5.0 / 3.0;

  [[nodiscard]] double p(double n) const { return K * std::pow(n, gamma); }
  [[nodiscard]] double dp(double n) const { return K * gamma * std::pow(n, gamma - 1.0); }
  /// p(n) - p(n0) - p'(n0)(n - n0)
  [[nodiscard]] double remainder(double n, double n0) const {
    return p(n) - p(n0) - dp(n0) * (n - n0);
  }
};

struct EquilibriumState {
  double n_inf = 1.0;
  Vec3 B_inf{0.0, 0.0, 0.0};
  PressureLaw pressure{};

  [[nodiscard]] double dp_inf() const { return pressure.dp(n_inf); }
  [[nodiscard]] double a_inf() const { return dp_inf() / n_inf; }
};

/// Throws InputError unless n_inf > 0, K > 0, gamma >= 1 and p'(n_inf) > 0.
void validate(const EquilibriumState& eq);

/// eta_0(|xi|) = |xi|^2 / (1 + |xi|^2)^2
inline double eta0(double r) {
  const double r2 = r * r;
  return r2 / ((1.0 + r2) * (1.0 + r2));
}

}  // namespace frequalize
