#include "frequalize/fit.hpp"

#include <fmt/format.h>

#include <cmath>

#include "frequalize/equilibrium.hpp"
#include "frequalize/error.hpp"
#include "frequalize/parallel.hpp"

namespace frequalize {

DecayReport fit_decay_exponent(const std::vector<double>& times, const std::vector<double>& values,
                               FitWindow window, std::string series) {
  if (times.size() != values.size())
    throw InputError(fmt::format("fit: {} times but {} values", times.size(), values.size()));
  if (!(window.t2 > window.t1) || !(window.t1 >= 0.0))
    throw InputError(fmt::format("fit window [{}, {}] must satisfy 0 <= t1 < t2", window.t1, window.t2));
  std::vector<double> x, y;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < window.t1 || times[k] > window.t2) continue;
    if (!(values[k] > 0.0))
      throw InputError(fmt::format("fit: value {} at t = {} is not positive", values[k], times[k]));
    x.push_back(std::log1p(times[k]));
    y.push_back(std::log(values[k]));
  }
  if (x.size() < 8)
    throw InputError(fmt::format("fit window [{}, {}] holds {} samples, need at least 8", window.t1,
                                 window.t2, x.size()));
  const double n = static_cast<double>(x.size());
  CompensatedSum sx, sy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx.add(x[k]);
    sy.add(y[k]);
  }
  const double mx = sx.value() / n, my = sy.value() / n;
  CompensatedSum sxx, sxy, syy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx.add((x[k] - mx) * (x[k] - mx));
    sxy.add((x[k] - mx) * (y[k] - my));
    syy.add((y[k] - my) * (y[k] - my));
  }
  DecayReport rep;
  rep.series = std::move(series);
  rep.window = window;
  rep.samples = x.size();
  rep.exponent = sxy.value() / sxx.value();
  rep.intercept = my - rep.exponent * mx;
  CompensatedSum ss_res;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (rep.intercept + rep.exponent * x[k]);
    ss_res.add(r * r);
  }
  // a constant series is a perfect (zero-slope) power law
  rep.r_squared = syy.value() > 0.0 ? 1.0 - ss_res.value() / syy.value() : 1.0;
  rep.power_law = rep.r_squared >= 0.95;
  if (!std::isfinite(rep.exponent)) throw NumericalError("fit produced a non-finite exponent");
  return rep;
}

double saturation_time(const TorusGrid& grid) { return 1.0 / eta0(grid.xi_min()); }

void check_saturation(const FitWindow& window, const TorusGrid& grid) {
  const double limit = 0.5 * saturation_time(grid);
  if (window.t2 > limit)
    throw InputError(fmt::format(
        "fit window ends at t = {} beyond the torus saturation guard 0.5/eta0(xi_min) = {:.4g}",
        window.t2, limit));
}

}  // namespace frequalize
