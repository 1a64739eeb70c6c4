#pragma once

#include <string>
#include <vector>

#include "frequalize/grid.hpp"

namespace frequalize {

struct FitWindow {
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Least-squares power law in log(value) vs log(1 + t).
struct DecayReport {
  std::string series;
  FitWindow window;
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
  bool power_law = true;  // r_squared >= 0.95
  std::size_t samples = 0;
  double saturation_time = 0.0;  // 1/eta0(xi_min) for torus runs, else 0
};

/// Needs >= 8 samples inside [t1, t2] and positive values there.
DecayReport fit_decay_exponent(const std::vector<double>& times, const std::vector<double>& values,
                               FitWindow window, std::string series = {});

/// 1/eta0(xi_min): beyond it torus decay turns exponential.
double saturation_time(const TorusGrid& grid);

/// Refuses windows with t2 > 0.5 / eta0(xi_min).
void check_saturation(const FitWindow& window, const TorusGrid& grid);

}  // namespace frequalize
