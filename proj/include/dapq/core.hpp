#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dapq/errors.hpp"

namespace dapq {

enum class ServiceKind { Exponential, Deterministic };

std::string_view to_string(ServiceKind kind);
ServiceKind parse_service_kind(std::string_view text);

/// A two-class delayed accumulating priority queue scenario.
///
/// Class-1 customers accumulate priority credit at rate 1 from arrival;
/// class-2 customers accumulate at rate `b` once they have waited `d`.
/// b = 0 (or d = infinity) is the non-preemptive priority queue, b = 1 with
/// d = 0 is FCFS.
struct QueueConfig {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mu = 1.0;
  double b = 0.0;
  double d = 0.0;
  ServiceKind service = ServiceKind::Exponential;

  double rho() const { return (lambda1 + lambda2) / mu; }
  /// E[S^2] of the common service time.
  double service_second_moment() const;
};

struct DerivedRates {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho = 0.0;
  double lambda1_acc = 0.0;  // lambda1 * (1 - b)
  double rho1_acc = 0.0;
  double nu = 0.0;      // uniformization rate mu + lambda1
  double p_up = 0.0;    // lambda1 / nu
  double q_down = 0.0;  // mu / nu
  double r_coef = 0.0;  // p_up + q_down * rho^2
};

/// Waiting-time target with compliance probability, e.g. P(W2 < 4) >= 0.85.
struct Kpi {
  double target_w = 0.0;
  double compliance_p = 0.0;
  int class_index = 2;

  void validate() const;
};

struct WaitSummary {
  double mean_w1 = 0.0;
  double mean_w2 = 0.0;
  double conservation_residual = 0.0;
};

/// Equally spaced CDF evaluation abscissae [0, t_max].
struct GridSpec {
  double step = 0.0;   // <= 0 selects 0.05/mu
  double t_max = 0.0;  // <= 0 selects the point where FCFS survival < 1e-6
};

struct ToleranceConfig {
  double eps_series = 1e-12;
  double eps_root = 1e-10;
  double eps_invert = 1e-7;
  std::size_t max_states = 200000;
  GridSpec grid{};

  void validate() const;
  /// Defaults overridden by DAPQ_EPS_SERIES, DAPQ_EPS_ROOT, DAPQ_EPS_INVERT
  /// and DAPQ_MAX_STATES when set.
  static ToleranceConfig from_env();
};

/// Checks every QueueConfig invariant and returns the derived rates.
DerivedRates validate(const QueueConfig& config);

/// Right-hand side of Kleinrock's conservation law,
/// rho / (1 - rho) * lambda * E[S^2] / 2. Independent of b and d.
double conservation_rhs(const QueueConfig& config);

/// E[W1] recovered from E[W2] through the conservation law.
double class1_mean_from_class2(const QueueConfig& config, double mean_w2);

/// |rho1 E[W1] + rho2 E[W2] - conservation_rhs|.
double conservation_residual(const QueueConfig& config, double mean_w1, double mean_w2);

/// Delay expressed as a whole number of mean service times, if it is one.
/// Tolerates floating-point noise of order 1e-9 relative.
bool delay_is_service_multiple(double d, double mu, long* multiple = nullptr);

std::vector<double> make_grid(const QueueConfig& config, const GridSpec& spec);

}  // namespace dapq
