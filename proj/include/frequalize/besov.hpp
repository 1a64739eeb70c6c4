#pragma once

#include <map>
#include <string>
#include <vector>

#include "frequalize/grid.hpp"
#include "frequalize/lp.hpp"

namespace frequalize {

struct BesovSpec {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;  // +inf allowed
  bool homogeneous = true;
};

/// Throws InputError on p < 1 or r < 1.
void validate(const BesovSpec& spec);

struct NormReport {
  BesovSpec spec;
  double value = 0.0;
  /// 2^{qs} ||Delta_q f||_{L^p} for every active q
  std::map<int, double> contributions;
  /// Per-component mean; reported separately because homogeneous norms ignore it.
  std::vector<double> mean;
};

/// l^r aggregation (sup for r = inf) of a set of nonnegative terms.
double lr_aggregate(const std::map<int, double>& terms, double r);

/// Multi-component fields are normed through their pointwise Euclidean magnitude.
/// p = 2 is evaluated on the Fourier side, other p through physical blocks.
NormReport besov_norm(const SpectralField& f, const BesovSpec& spec);
NormReport besov_norm(const PhysicalField& f, const BesovSpec& spec);

/// sup_q 2^{-q rho} ||Delta_q f||_{L^2} (homogeneous); rho > 0.
double negative_norm(const SpectralField& f, double rho);
double negative_norm(const PhysicalField& f, double rho);

struct CheminLernerSpec {
  BesovSpec besov;
  double theta = 2.0;  // +inf allowed
};

/// Sampled trajectory; samples[k] is the state at times[k].
struct FieldSeries {
  std::vector<double> times;
  std::vector<SpectralField> samples;
};

struct CheminLernerReport {
  CheminLernerSpec spec;
  double value = 0.0;
  /// 2^{qs} ||Delta_q f||_{L^theta_T(L^p)}
  std::map<int, double> contributions;
  /// Relative change when every other sample is dropped.
  double refinement_change = 0.0;
  bool under_resolved = false;
};

/// Tilde norm: time L^theta inside the block sum, trapezoid in time.
CheminLernerReport chemin_lerner_norm(const FieldSeries& series, const CheminLernerSpec& spec);

/// Plain mixed norm ||f||_{L^theta_T(B^s_{p,r})}, same quadrature.
double mixed_norm(const FieldSeries& series, const CheminLernerSpec& spec);

/// L^theta norm of g over the sample times, trapezoid rule.
double time_norm(const std::vector<double>& times, const std::vector<double>& g, double theta);

enum class ProbeKind {
  Embedding,          // B^s_{p,r} -> B^{s - n(1/p - 1/pt)}_{pt,r}
  SupEmbedding,       // ||f||_inf <= C ||f||_{B^{n/p}_{p,1}}
  Algebra,            // ||fg||_{B^s_{p,r}} <= C (||f||_inf ||g|| + ||g||_inf ||f||)
  CriticalProduct,    // ||fg||_{B^{s1+s2-n/p}_{p,1}} <= C ||f||_{B^{s1}_{p,1}} ||g||_{B^{s2}_{p,1}}
  Moser,              // ||fg||_{B^s_{p,r}} <= C (||f||_{p1}||g||_{B^s_{p2,r}} + ||g||_{p3}||f||_{B^s_{p4,r}})
  NegativeEmbedding,  // ||f||_{B^{-rho}_{pt,inf}} <= C ||f||_{L^p}, 1/p - 1/pt = rho/n
};

struct ProbeParams {
  double s = 1.0;
  double p = 2.0;
  double p_target = 2.0;
  double r = 2.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double p1 = 2.0, p2 = 2.0, p3 = 2.0, p4 = 2.0;
  double rho = 1.5;
};

struct ProbePair {
  PhysicalField f;
  PhysicalField g;
};

struct ProbeReport {
  ProbeKind kind;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> ratios;  // 0 where lhs = 0
  double max_ratio = 0.0;
};

/// Checks the hypotheses of the chosen inequality (HypothesisError naming the
/// violated one) and returns LHS/RHS per sample. Single-field kinds ignore g.
ProbeReport inequality_probe(ProbeKind kind, const ProbeParams& params,
                             const std::vector<ProbePair>& samples);

std::string to_string(ProbeKind kind);
ProbeKind probe_kind_from_string(const std::string& name);

/// The energy functionals of the decay analysis, evaluated on a 10-component
/// perturbation z = (rho, upsilon, E, h) as samples arrive:
///   N0 = ||z||_{L~inf_t(B^{5/2}_{2,1})}
///   D0 = ||(rho,u)||_{L~2_t(B^{5/2}_{2,1})} + ||E||_{L~2_t(B^{3/2}_{2,1})} + ||grad h||_{L~2_t(B^{1/2}_{2,1})}
///   N  = sup_{tau<=t} (1+tau)^{3/4} ||z(tau)||_{L^2}
///   D  = D0 with the time norm outside the block sum.
struct EnergyValues {
  double t = 0.0;
  double N0 = 0.0;
  double D0 = 0.0;
  double N = 0.0;
  double D = 0.0;
};

class EnergyTracker {
public:
  explicit EnergyTracker(const TorusGrid& grid);

  /// Samples must arrive with strictly increasing t.
  EnergyValues push(double t, const SpectralField& z);
  [[nodiscard]] const EnergyValues& current() const { return current_; }

private:
  struct Term {
    double s;
    std::vector<double> prev;      // previous block norms
    std::vector<double> tilde_sq;  // per-block running integral of squares
    double prev_besov = 0.0;
    double plain_sq = 0.0;
  };

  const BlockTable* table_;
  std::vector<double> sup_blocks_;
  Term rho_u_{2.5, {}, {}, 0.0, 0.0};
  Term electric_{1.5, {}, {}, 0.0, 0.0};
  Term grad_h_{0.5, {}, {}, 0.0, 0.0};
  bool started_ = false;
  double prev_t_ = 0.0;
  EnergyValues current_;

  void advance(Term& term, const std::vector<double>& blocks, double dt);
  [[nodiscard]] double tilde_value(const Term& term) const;
};

std::vector<EnergyValues> energy_functionals(const FieldSeries& series);

}  // namespace frequalize
