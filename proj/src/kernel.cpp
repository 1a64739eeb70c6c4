#include "frequalize/kernel.hpp"

#include <fmt/format.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "frequalize/besov.hpp"
#include "frequalize/error.hpp"
#include "frequalize/parallel.hpp"

namespace frequalize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double aggregate(const std::vector<double>& terms, double alpha) {
  if (std::isinf(alpha)) {
    double m = 0.0;
    for (double v : terms) m = std::max(m, v);
    return m;
  }
  CompensatedSum sum;
  for (double v : terms) sum.add(alpha == 1.0 ? v : std::pow(v, alpha));
  return alpha == 1.0 ? sum.value() : std::pow(sum.value(), 1.0 / alpha);
}

double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  return den > 0.0 ? num / den : kInf;
}

double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / boost::math::tgamma(0.5 * n);
}

}  // namespace

DissipRate DissipRate::ab(double a, double b, double c0) {
  DissipRate r;
  r.form = Form::AB;
  r.a = a;
  r.b = b;
  r.c0 = c0;
  return r;
}

DissipRate DissipRate::asymptotic(double sigma1, double sigma2, double c0,
                                  std::function<double(double)> profile) {
  DissipRate r;
  r.form = Form::Asymptotic;
  r.s1 = sigma1;
  r.s2 = sigma2;
  r.c0 = c0;
  r.profile = std::move(profile);
  return r;
}

double DissipRate::sigma1() const { return form == Form::AB ? 2.0 * a : s1; }
double DissipRate::sigma2() const { return form == Form::AB ? 2.0 * b - 2.0 * a : s2; }

void validate(const DissipRate& rate) {
  if (!(rate.c0 > 0.0)) throw InputError(fmt::format("rate constant c0 must be > 0 (got {})", rate.c0));
  if (rate.form == DissipRate::Form::AB) {
    if (!(rate.a > 0.0) || !(rate.b > 0.0))
      throw InputError(fmt::format("(a,b) rate needs a, b > 0 (got {}, {})", rate.a, rate.b));
  } else if (!(rate.s1 > 0.0) || !(rate.s2 > 0.0)) {
    throw InputError(fmt::format("asymptotic rate needs sigma1, sigma2 > 0 (got {}, {})", rate.s1,
                                 rate.s2));
  }
}

double eta_eval(const DissipRate& rate, double r) {
  if (rate.form == DissipRate::Form::AB)
    return std::pow(r, 2.0 * rate.a) / std::pow(1.0 + r * r, rate.b);
  if (rate.profile) return rate.profile(r);
  return std::pow(r, rate.s1) / (1.0 + std::pow(r, rate.s1 + rate.s2));
}

double gamma_exponent(int n, double sigma, double r, double p) {
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  return (n / sigma) * (1.0 / r - inv_p);
}

HypothesisCheck check_hypotheses(const DecayParams& p, int n) {
  HypothesisCheck out;
  auto violate = [&](std::string note) {
    out.status = HypothesisStatus::Violated;
    out.notes.push_back(std::move(note));
  };
  if (!(p.s + p.rho > 0.0)) violate(fmt::format("s + rho = {} must be > 0", p.s + p.rho));
  if (!(p.r >= 1.0 && p.r <= 2.0)) violate(fmt::format("r = {} must lie in [1, 2]", p.r));
  if (!(p.alpha >= 1.0)) violate(fmt::format("alpha = {} must be >= 1", p.alpha));
  if (p.r >= 1.0 && p.r < 2.0) {
    const double threshold = n * (1.0 / p.r - 0.5);
    if (std::abs(p.ell - threshold) <= 1e-12 * std::max(1.0, threshold)) {
      if (out.status == HypothesisStatus::Ok) out.status = HypothesisStatus::Borderline;
      out.notes.push_back(fmt::format(
          "ell = {} sits exactly on the threshold n(1/r - 1/2) = {}; the strict inequality fails",
          p.ell, threshold));
    } else if (p.ell < threshold) {
      violate(fmt::format("ell = {} must exceed n(1/r - 1/2) = {}", p.ell, threshold));
    }
  } else if (p.r == 2.0 && p.ell < 0.0) {
    violate(fmt::format("ell = {} must be >= 0 when r = 2", p.ell));
  }
  return out;
}

std::string to_string(HypothesisStatus status) {
  switch (status) {
    case HypothesisStatus::Ok: return "ok";
    case HypothesisStatus::Borderline: return "borderline";
    case HypothesisStatus::Violated: return "violated";
  }
  return "unknown";
}

KernelEvaluator::KernelEvaluator(const SpectralField& f, const DissipRate& rate) : c0_(rate.c0) {
  validate(rate);
  const BlockTable& table = block_table(f.grid, true);
  range_ = table.range();
  const double inv_volume = 1.0 / f.grid.volume();
  energy_.resize(static_cast<std::size_t>(range_.count()));
  eta_.resize(energy_.size());
  for (int q = range_.q_min; q <= range_.q_max; ++q) {
    const auto b = static_cast<std::size_t>(q - range_.q_min);
    for (const auto& e : table.entries(q)) {
      double energy = 0.0;
      for (int c = 0; c < f.components; ++c) energy += std::norm(f.at(c, e.index));
      const Vec3 xi = f.grid.frequency(e.index);
      energy_[b].push_back(e.weight * e.weight * energy * inv_volume);
      eta_[b].push_back(eta_eval(rate, std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])));
    }
  }
}

std::vector<double> KernelEvaluator::block_norms(double t) const {
  if (!(t >= 0.0)) throw InputError(fmt::format("time must be >= 0 (got {})", t));
  std::vector<double> out(energy_.size(), 0.0);
  for (std::size_t b = 0; b < energy_.size(); ++b) {
    CompensatedSum sum;
    for (std::size_t k = 0; k < energy_[b].size(); ++k)
      sum.add(energy_[b][k] * std::exp(-2.0 * c0_ * eta_[b][k] * t));
    out[b] = std::sqrt(std::max(sum.value(), 0.0));
  }
  return out;
}

double KernelEvaluator::lhs(double t, double s, double alpha) const {
  return lhs(t, s, alpha, range_.q_min, range_.q_max);
}

double KernelEvaluator::lhs(double t, double s, double alpha, int q_lo, int q_hi) const {
  const auto norms = block_norms(t);
  std::vector<double> terms;
  for (int q = std::max(q_lo, range_.q_min); q <= std::min(q_hi, range_.q_max); ++q)
    terms.push_back(std::exp2(q * s) * norms[static_cast<std::size_t>(q - range_.q_min)]);
  return aggregate(terms, alpha);
}

double lhs_norm(const SpectralField& f, double t, double s, double alpha, const DissipRate& rate) {
  return KernelEvaluator(f, rate).lhs(t, s, alpha);
}

namespace {

struct RhsNorms {
  double negative;
  double high_besov;
};

RhsNorms rhs_norms(const SpectralField& f, const DecayParams& p) {
  return {besov_norm(f, BesovSpec{-p.rho, 2.0, kInf, true}).value,
          besov_norm(f, BesovSpec{p.s + p.ell, p.r, p.alpha, true}).value};
}

HypothesisCheck enforce(const DecayParams& p, const DissipRate& rate, int n,
                        bool allow_violation) {
  if (!(rate.sigma1() > 0.0) || !(rate.sigma2() > 0.0))
    throw HypothesisError(fmt::format(
        "decay inequality needs sigma1, sigma2 > 0 (rate gives {}, {})", rate.sigma1(),
        rate.sigma2()));
  auto check = check_hypotheses(p, n);
  if (check.status == HypothesisStatus::Violated && !allow_violation) {
    std::string msg = "decay inequality hypotheses violated:";
    for (const auto& note : check.notes) msg += " " + note + ";";
    throw HypothesisError(msg);
  }
  return check;
}

RhsTerms terms_at(double t, const RhsNorms& norms, double low_exp, double high_exp) {
  return {std::pow(1.0 + t, low_exp) * norms.negative, std::pow(1.0 + t, high_exp) * norms.high_besov};
}

}  // namespace

RhsTerms rhs_bound(const SpectralField& f, double t, const DecayParams& params,
                   const DissipRate& rate, bool allow_violation) {
  validate(rate);
  const int n = f.grid.dim();
  enforce(params, rate, n, allow_violation);
  if (!(t >= 0.0)) throw InputError(fmt::format("time must be >= 0 (got {})", t));
  const double gamma = gamma_exponent(n, rate.sigma2(), params.r, 2.0);
  return terms_at(t, rhs_norms(f, params), -(params.s + params.rho) / rate.sigma1(),
                  -params.ell / rate.sigma2() + gamma);
}

double profile_maximum(double a, double c, double sigma) {
  if (!(a > 0.0) || !(c > 0.0) || !(sigma > 0.0))
    throw InputError("profile_maximum needs a, c, sigma > 0");
  return std::pow(a / (c * sigma), a / sigma) * std::exp(-a / sigma);
}

InequalityReport verify_inequality(const SpectralField& f, const std::vector<double>& times,
                                   const DecayParams& params, const DissipRate& rate,
                                   bool allow_violation) {
  validate(rate);
  if (times.empty()) throw InputError("verify_inequality needs a non-empty time grid");
  const int n = f.grid.dim();
  InequalityReport rep;
  rep.hypotheses = enforce(params, rate, n, allow_violation);
  const double s1 = rate.sigma1(), s2 = rate.sigma2();
  rep.gamma = gamma_exponent(n, s2, params.r, 2.0);
  rep.low_exponent = -(params.s + params.rho) / s1;
  rep.high_exponent = -params.ell / s2 + rep.gamma;
  rep.times = times;

  // profile constant on the low blocks: |xi| <= (4/3) 2^{q0}
  const double R = (4.0 / 3.0) * std::exp2(params.q0);
  double inf_ratio = kInf;
  for (int k = 0; k <= 600; ++k) {
    const double r = R * std::pow(10.0, -6.0 + 6.0 * k / 600.0);
    inf_ratio = std::min(inf_ratio, rate.c0 * eta_eval(rate, r) / std::pow(r, s1));
  }
  rep.profile_rate = std::pow(0.75, s1) * inf_ratio;

  const KernelEvaluator eval(f, rate);
  const RhsNorms norms = rhs_norms(f, params);
  const auto range = eval.range();
  const double a = params.s + params.rho;

  const std::size_t nt = times.size();
  rep.lhs.resize(nt);
  rep.low.resize(nt);
  rep.high.resize(nt);
  rep.ratio.resize(nt);
  rep.low_regime_ratio.resize(nt);
  rep.high_regime_ratio.resize(nt);
  rep.profile_sum.resize(nt);
  parallel_for(nt, [&](std::size_t k) {
    const double t = times[k];
    if (!(t >= 0.0)) throw InputError(fmt::format("time must be >= 0 (got {})", t));
    const auto blocks = eval.block_norms(t);
    std::vector<double> all, lo, hi, prof;
    for (int q = range.q_min; q <= range.q_max; ++q) {
      const double term = std::exp2(q * params.s) * blocks[static_cast<std::size_t>(q - range.q_min)];
      all.push_back(term);
      (q < params.q0 ? lo : hi).push_back(term);
      if (q < params.q0) {
        const double x = std::exp2(q) * std::pow(t, 1.0 / s1);
        prof.push_back(x > 0.0 ? std::pow(x, a) * std::exp(-rep.profile_rate * std::pow(x, s1)) : 0.0);
      }
    }
    const RhsTerms rhs = terms_at(t, norms, rep.low_exponent, rep.high_exponent);
    rep.lhs[k] = aggregate(all, params.alpha);
    rep.low[k] = rhs.low;
    rep.high[k] = rhs.high;
    rep.ratio[k] = safe_ratio(rep.lhs[k], rhs.low + rhs.high);
    rep.low_regime_ratio[k] = safe_ratio(aggregate(lo, params.alpha), rhs.low);
    rep.high_regime_ratio[k] = safe_ratio(aggregate(hi, params.alpha), rhs.high);
    rep.profile_sum[k] = aggregate(prof, params.alpha);
  });
  for (double r : rep.ratio) rep.sup_ratio = std::max(rep.sup_ratio, r);
  return rep;
}

namespace {

// int_{u0}^{u1} exp(kappa u - mu exp(-sigma2 u)) du on panels of width <= 0.25
double log_radial_panel(double u0, double u1, double kappa, double mu, double sigma2) {
  const int panels = std::max(1, static_cast<int>(std::ceil((u1 - u0) / 0.25)));
  const double w = (u1 - u0) / panels;
  CompensatedSum sum;
  for (int k = 0; k < panels; ++k) {
    const double a = u0 + k * w;
    sum.add(boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double u) { return std::exp(kappa * u - mu * std::exp(-sigma2 * u)); }, a, a + w));
  }
  return sum.value();
}

double integral_exponent_m(double r) {
  if (!(r >= 1.0 && r < 2.0)) throw InputError("the radial integral needs 1 <= r < 2");
  return 1.0 / (1.0 / r - 0.5);
}

}  // namespace

RadialIntegralReport radial_integral(int n, const DecayParams& params, double sigma2, double c0,
                                     double t, double K0, int doublings) {
  if (doublings < 2) throw InputError("radial_integral needs at least 2 doublings");
  RadialIntegralReport rep;
  rep.m = integral_exponent_m(params.r);
  rep.predicted_exponent = n - rep.m * params.ell;
  const double kappa = n - rep.m * params.ell;
  const double mu = rep.m * c0 * t;
  const double u_start = params.q0 * std::numbers::ln2;
  const double area = sphere_area(n);

  double u = u_start;
  double running = 0.0;
  for (int j = 0; j <= doublings; ++j) {
    const double K = K0 * std::exp2(j);
    const double u_end = std::max(u_start, std::log(K));
    running += area * log_radial_panel(u, u_end, kappa, mu, sigma2);
    u = u_end;
    rep.cutoffs.push_back(K);
    rep.values.push_back(running);
  }
  const std::size_t last = rep.values.size() - 1;
  const double d1 = rep.values[last] - rep.values[last - 1];
  const double d0 = rep.values[last - 1] - rep.values[last - 2];
  rep.measured_exponent = (d0 > 0.0 && d1 > 0.0) ? std::log2(d1 / d0) : -kInf;
  rep.diverges = rep.measured_exponent >= -0.05;
  return rep;
}

double weight_norm(int n, const DecayParams& params, double sigma2, double c0, double t) {
  const double R0 = std::exp2(params.q0);
  if (params.r == 2.0) {
    // sup over x = 1/rho in (0, 1/R0] of x^ell exp(-c0 t x^sigma2)
    if (params.ell == 0.0) return 1.0;
    const double x_edge = 1.0 / R0;
    if (t == 0.0) return std::pow(x_edge, params.ell);
    const double x_star = std::pow(params.ell / (c0 * t * sigma2), 1.0 / sigma2);
    const double x = std::min(x_star, x_edge);
    return std::pow(x, params.ell) * std::exp(-c0 * t * std::pow(x, sigma2));
  }
  const double m = integral_exponent_m(params.r);
  const double kappa = n - m * params.ell;
  if (kappa >= 0.0) return kInf;
  const double mu = m * c0 * t;
  // past the peak of the integrand, then until panels stop contributing
  const double u_peak = mu > 0.0 ? std::log(mu * sigma2 / -kappa) / sigma2 : 0.0;
  double u = std::log(R0);
  CompensatedSum sum;
  for (int guard = 0; guard < 4000; ++guard) {
    const double piece = log_radial_panel(u, u + 1.0, kappa, mu, sigma2);
    sum.add(piece);
    u += 1.0;
    if (u > u_peak && piece <= 1e-16 * sum.value()) break;
  }
  sum.add(std::exp(kappa * u) / -kappa);  // tail, exponential factor ~ 1
  return std::pow(sphere_area(n) * sum.value(), 1.0 / m);
}

SpectralField lattice_spike(const TorusGrid& grid) {
  SpectralField f(grid, 1);
  for (auto& c : f.coefficients) c = 1.0;
  return f;
}

SharpnessReport sharpness_probe(int dim, double box_length, const std::vector<int>& points,
                                const std::vector<double>& times, const DecayParams& params,
                                const DissipRate& rate) {
  if (points.size() < 2) throw InputError("sharpness_probe needs at least two grid sizes");
  SharpnessReport rep;
  rep.points = points;
  for (int n_pts : points) {
    const TorusGrid grid(dim, box_length, n_pts);
    const auto report = verify_inequality(lattice_spike(grid), times, params, rate, true);
    rep.sup_ratios.push_back(report.sup_ratio);
  }
  for (std::size_t k = 1; k < rep.sup_ratios.size(); ++k) {
    const double g = rep.sup_ratios[k] / rep.sup_ratios[k - 1];
    const double doublings = std::log2(static_cast<double>(points[k]) / points[k - 1]);
    rep.growth.push_back(std::pow(g, 1.0 / doublings));  // per doubling of N
  }
  rep.predicted_growth = std::exp2(dim * (1.0 / params.r - 0.5) - params.ell);
  rep.diverges = true;
  for (double g : rep.growth) rep.diverges = rep.diverges && g >= 1.25;
  if (params.r < 2.0)
    rep.integral = radial_integral(dim, params, rate.sigma2(), rate.c0, 1.0);
  return rep;
}

}  // namespace frequalize
