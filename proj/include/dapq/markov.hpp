#pragma once

#include <cstddef>
#include <vector>

#include "dapq/core.hpp"

namespace dapq {

/// Stationary number-in-system distribution, exact up to truncation_K and
/// geometric beyond it.
struct StationaryDist {
  std::vector<double> probs;  // pi_0 .. pi_K
  double tail_ratio = 0.0;
  std::size_t truncation_K = 0;

  double prob(std::size_t i) const;
  /// Exact part plus the geometric continuation.
  double total_mass() const;
};

/// pi_i = (1 - rho) rho^i, cut at the smallest K with rho^(K+1) < eps_series.
StationaryDist mm1_stationary(double rho, const ToleranceConfig& tol);

/// One exact M/D/1 probability, evaluated in 50-digit arithmetic because the
/// alternating sum cancels badly. Returns the value and, optionally, the number
/// of decimal digits lost to cancellation.
double md1_pi_exact(double rho, std::size_t i, double* digits_lost = nullptr);

/// Exact terms until consecutive ratios settle on md1_tail_ratio, geometric after.
StationaryDist md1_stationary(double rho, const ToleranceConfig& tol);

/// Decay ratio of the M/D/1 queue length tail.
///
/// sigma solves exp(rho sigma) / sigma = exp(rho) with sigma > 1/rho (sigma = 1
/// is the trivial root). Checked against exact terms: pi_{i+1}/pi_i tends to
/// 1/sigma, not sigma, so 1/sigma is returned.
double md1_tail_ratio(double rho, const ToleranceConfig& tol);

/// P[N_d = j, N_t > 0 for t in [0,d) | N_0 = i] for the class-1 birth-death
/// chain (births lambda1, deaths mu), states i, j >= 1.
struct SurvivalTransition {
  std::size_t max_from = 0;  // i in 1..max_from
  std::size_t max_to = 0;    // j in 1..max_to
  std::size_t k_max = 0;     // last Poisson index kept
  std::vector<double> probs; // row-major, (i-1) * max_to + (j-1)

  double at(std::size_t i, std::size_t j) const;
  double row_sum(std::size_t i) const;
};

SurvivalTransition survival_transition(const QueueConfig& config, const ToleranceConfig& tol);

/// v_j = sum_i pi_i P[N_d = j, busy on [0,d) | N_0 = i] with pi the M/M/1
/// stationary law at total occupancy. Index 0 is unused and left at zero.
std::vector<double> arrival_survival_weights(const QueueConfig& config, const ToleranceConfig& tol);

}  // namespace dapq
