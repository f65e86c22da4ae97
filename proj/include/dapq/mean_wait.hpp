#pragma once

#include <cstddef>
#include <vector>

#include "dapq/core.hpp"

namespace dapq {

double fcfs_mean(const QueueConfig& config);
/// Non-preemptive priority: class-2 (low) mean.
double npq_class2_mean(const QueueConfig& config);
/// Non-preemptive priority: class-1 (high) mean.
double npq_class1_mean(const QueueConfig& config);

/// Scaled survival probabilities of the class-1 birth-death chain started
/// from the geometric law, x_l^(k) = (pi_+ P_+^k)_l / (1 - rho) for l <= k.
///
/// Built by x_i^(k) = p x_{i-1}^(k-1) + q x_{i+1}^(k-1) with x_0 = 0. Entries
/// with l > k never feel the absorbing state and equal rho^(l-k) r^k, so the
/// boundary case x_1^(2) = q x_2^(1) = q rho r.
class XTable {
 public:
  XTable(const DerivedRates& rates, std::size_t k_max);

  std::size_t k_max() const { return k_max_; }
  /// Any l >= 1; entries past the diagonal use the closed continuation.
  double at(std::size_t k, std::size_t l) const;

 private:
  double rho_, r_;
  std::size_t k_max_;
  std::vector<std::vector<double>> rows_;  // rows_[k][l-1], l = 1..k
};

XTable x_table(const DerivedRates& rates, std::size_t k_max);

/// Exact class-2 mean for exponential service.
double mm1_dapq_class2_mean(const QueueConfig& config, const ToleranceConfig& tol);

/// Exact class-2 mean for deterministic service, d a whole number of services.
double md1_dapq_class2_mean(const QueueConfig& config, const ToleranceConfig& tol);

WaitSummary dapq_means(const QueueConfig& config, const ToleranceConfig& tol);

/// scv * (exponential result) + (1 - scv) * (deterministic result) per class.
/// An approximation for general service, not an exact result.
WaitSummary interpolated_mean(const QueueConfig& config, double scv, const ToleranceConfig& tol);

}  // namespace dapq
