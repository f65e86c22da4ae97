#pragma once

#include <string>
#include <vector>

#include "dapq/core.hpp"

namespace dapq {

struct PolicyPoint {
  double d = 0.0;
  double b_star = 0.0;
  double mean_w1 = 0.0;
  double mean_w2 = 0.0;
  bool feasible = false;
  double constraint = 0.0;  // F2(w) for class-2 targets, E[W1] for class-1 targets
};

/// Smallest b in [0,1] with P(W2 <= w) >= p at the given d (config.b is
/// ignored). Infeasible points report b = 1 and feasible = false.
PolicyPoint b_star_class2(const QueueConfig& config, const Kpi& kpi, const ToleranceConfig& tol);

/// Largest b in [0,1] whose exact class-1 mean stays under the Z-Exp
/// threshold. Infeasible points report b = 0 and feasible = false.
PolicyPoint b_star_class1(const QueueConfig& config, const Kpi& kpi, const ToleranceConfig& tol);

PolicyPoint b_star(const QueueConfig& config, const Kpi& kpi, const ToleranceConfig& tol);

struct RatePoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Arrival-rate pairs where tuning (b, d) matters: above `lower` the
/// discipline least favorable to the KPI class misses the target, below
/// `upper` the most favorable one still meets it. Both are sampled at the
/// same lambda1 values, so lower[i] and upper[i] pair up.
struct FeasibleRegion {
  Kpi kpi;
  double mu = 1.0;
  std::vector<RatePoint> lower;
  std::vector<RatePoint> upper;

  bool contains(double lambda1, double lambda2) const;
};

FeasibleRegion feasible_region(const Kpi& kpi, double mu, double resolution, const ToleranceConfig& tol);

enum class RegionStatus { ExtremeSuffices, Tunable, Infeasible };
std::string_view to_string(RegionStatus status);

/// Where (lambda1, lambda2) sits relative to the region, from the two
/// extreme disciplines directly.
RegionStatus classify_rates(const Kpi& kpi, double lambda1, double lambda2, double mu, const ToleranceConfig& tol);

/// P(W <= w) under the two extremes, exact in closed form or by inversion.
double npq_class2_cdf_at(double lambda1, double lambda2, double mu, double w, const ToleranceConfig& tol);
double fcfs_cdf_at(double lambda1, double lambda2, double mu, double w);
double npq_class1_cdf_at(double lambda1, double lambda2, double mu, double w);

struct PolicySweep {
  std::vector<PolicyPoint> points;
  /// Class-2 targets: E[W1] nondecreasing over the feasible points.
  /// Class-1 targets: E[W2] constant to 1e-4 over points with 0 < b* < 1.
  bool trend_holds = true;
  std::string trend;
};

PolicySweep policy_sweep(const QueueConfig& config, const Kpi& kpi, const std::vector<double>& d_values,
                         const ToleranceConfig& tol);

}  // namespace dapq
