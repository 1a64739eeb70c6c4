#pragma once

#include <functional>
#include <string>
#include <vector>

#include "frequalize/grid.hpp"
#include "frequalize/lp.hpp"

namespace frequalize {

/// Dissipative rate eta(xi), radial. Either the (a,b) family
/// |xi|^{2a} / (1 + |xi|^2)^b, or an asymptotic pair (sigma1, sigma2) with a
/// profile (default |xi|^s1 / (1 + |xi|^{s1+s2})). The kernel is exp(-c0 eta t).
struct DissipRate {
  enum class Form { AB, Asymptotic };

  Form form = Form::AB;
  double a = 1.0;
  double b = 2.0;
  double s1 = 2.0;
  double s2 = 2.0;
  double c0 = 1.0;
  std::function<double(double)> profile;  // optional, Asymptotic only

  static DissipRate ab(double a, double b, double c0 = 1.0);
  static DissipRate asymptotic(double sigma1, double sigma2, double c0 = 1.0,
                               std::function<double(double)> profile = {});

  [[nodiscard]] double sigma1() const;
  [[nodiscard]] double sigma2() const;
};

/// Throws InputError unless a, b > 0 (AB) or sigma1, sigma2 > 0, and c0 > 0.
void validate(const DissipRate& rate);

/// eta at radius r (without c0).
double eta_eval(const DissipRate& rate, double r);

/// gamma_sigma(r, p) = (n / sigma)(1/r - 1/p)
double gamma_exponent(int n, double sigma, double r, double p);

struct DecayParams {
  double s = 0.0;
  double ell = 2.0;
  double rho = 1.5;
  double r = 2.0;
  double alpha = 2.0;
  int q0 = 0;
};

enum class HypothesisStatus { Ok, Borderline, Violated };

struct HypothesisCheck {
  HypothesisStatus status = HypothesisStatus::Ok;
  std::vector<std::string> notes;
};

/// s + rho > 0, 1 <= r <= 2, alpha >= 1, and ell > n(1/r - 1/2) for r < 2
/// (ell equal to the threshold is Borderline) or ell >= 0 for r = 2.
HypothesisCheck check_hypotheses(const DecayParams& params, int n);

std::string to_string(HypothesisStatus status);

/// Coefficientwise evaluation of ||2^{qs} ||Delta_q f^ e^{-c0 eta t}||_{L^2}||_{l^alpha}
/// with per-block support lists built once.
class KernelEvaluator {
public:
  KernelEvaluator(const SpectralField& f, const DissipRate& rate);

  /// Whole norm, or only blocks with q in [q_lo, q_hi].
  [[nodiscard]] double lhs(double t, double s, double alpha) const;
  [[nodiscard]] double lhs(double t, double s, double alpha, int q_lo, int q_hi) const;
  [[nodiscard]] std::vector<double> block_norms(double t) const;
  [[nodiscard]] BlockIndexRange range() const { return range_; }

private:
  BlockIndexRange range_;
  double c0_;
  std::vector<std::vector<double>> energy_;  // w^2 sum_c |f_c|^2 / V per entry
  std::vector<std::vector<double>> eta_;     // eta per entry
};

double lhs_norm(const SpectralField& f, double t, double s, double alpha, const DissipRate& rate);

struct RhsTerms {
  double low = 0.0;
  double high = 0.0;
};

/// Both terms of the right side. Throws HypothesisError when the parameters
/// are Violated, unless allow_violation is set (sharpness probes).
RhsTerms rhs_bound(const SpectralField& f, double t, const DecayParams& params,
                   const DissipRate& rate, bool allow_violation = false);

struct InequalityReport {
  std::vector<double> times;
  std::vector<double> lhs;
  std::vector<double> low;
  std::vector<double> high;
  std::vector<double> ratio;
  double sup_ratio = 0.0;
  double gamma = 0.0;
  double low_exponent = 0.0;   // -(s + rho) / sigma1
  double high_exponent = 0.0;  // -ell / sigma2 + gamma
  HypothesisCheck hypotheses;

  /// Blocks q < q0 against (1+t)^{-(s+rho)/sigma1} ||f||_{B^{-rho}_{2,inf}}
  std::vector<double> low_regime_ratio;
  /// ||(2^q t^{1/sigma1})^{s+rho} exp(-c (2^q t^{1/sigma1})^{sigma1})||_{l^alpha} over all q
  std::vector<double> profile_sum;
  /// constant c of the profile: (3/4)^sigma1 inf_{0<|xi|<=R} c0 eta / |xi|^sigma1
  double profile_rate = 0.0;
  /// Blocks q >= q0 against the high-frequency term
  std::vector<double> high_regime_ratio;
};

InequalityReport verify_inequality(const SpectralField& f, const std::vector<double>& times,
                                   const DecayParams& params, const DissipRate& rate,
                                   bool allow_violation = false);

/// max_{x>0} x^a exp(-c x^sigma) = (a / (c sigma))^{a/sigma} e^{-a/sigma}
double profile_maximum(double a, double c, double sigma);

/// I(K) = omega_{n-1} int_{R0}^{K} rho^{n-1-m ell} exp(-m c0 t rho^{-sigma2}) d rho with
/// 1/m = 1/r - 1/2, i.e. the m-th power of the weight norm bounded in the
/// high-frequency step. Evaluated for K = K0 2^j.
struct RadialIntegralReport {
  double m = 0.0;
  double predicted_exponent = 0.0;  // n - m ell, growth of the increments in log2 K
  std::vector<double> cutoffs;
  std::vector<double> values;
  double measured_exponent = 0.0;   // log2 of the last increment ratio
  bool diverges = false;
};

RadialIntegralReport radial_integral(int n, const DecayParams& params, double sigma2, double c0,
                                     double t, double K0 = 4.0, int doublings = 12);

/// Weight norm ||exp(-c0 t |xi|^{-sigma2}) / |xi|^ell||_{L^m(|xi| >= R0)} for
/// K -> infinity (r < 2), or the sup (r = 2). Infinite when the integral diverges.
double weight_norm(int n, const DecayParams& params, double sigma2, double c0, double t);

/// Lattice delta at the origin on grids of increasing N, sup ratio over times.
/// For ell below the threshold the ratio grows like 2^{n(1/r - 1/2) - ell} per doubling.
struct SharpnessReport {
  std::vector<int> points;
  std::vector<double> sup_ratios;
  std::vector<double> growth;
  double predicted_growth = 1.0;
  bool diverges = false;
  RadialIntegralReport integral;
};

SharpnessReport sharpness_probe(int dim, double box_length, const std::vector<int>& points,
                                const std::vector<double>& times, const DecayParams& params,
                                const DissipRate& rate);

/// Lattice delta 1/h^dim at the origin, f^ = 1 on every mode.
SpectralField lattice_spike(const TorusGrid& grid);

}  // namespace frequalize
