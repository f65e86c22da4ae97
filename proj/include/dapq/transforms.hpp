#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "dapq/core.hpp"

namespace dapq {

using cplx = std::complex<double>;

/// Laplace-Stieltjes transform E[exp(-sX)] of a (possibly defective)
/// nonnegative random variable.
struct Lst {
  std::function<cplx(cplx)> eval;
  double mass = 1.0;  // value at s = 0
  double atom = 0.0;  // P[X = 0], the limit as s grows
  std::string name;

  double operator()(double s) const { return eval(cplx(s, 0.0)).real(); }
};

/// Nondecreasing CDF sampled on increasing abscissae.
struct CdfCurve {
  std::vector<double> t;
  std::vector<double> F;
  std::string provenance;  // closed-form | inverted | approximate | empirical
  double max_monotone_adjust = 0.0;
  double max_error_estimate = 0.0;

  /// Linear interpolation; 0 before the first abscissa, last value after.
  double at(double x) const;
};

/// Accreditation-interval transform for exponential service: the root in the
/// unit disc of a eta^2 - (s + mu + a) eta + mu = 0, a the arrival rate.
/// Written as 2 mu / (B + sqrt(B^2 - 4 mu a)) with the larger-modulus
/// denominator, which stays finite at a = 0 and for complex s.
double eta_mm1(double s, double arrival_rate, double mu);
cplx eta_mm1(cplx s, double arrival_rate, double mu);

/// Same interval for either service kind by iterating eta = S(s + a(1 - eta)) from 1.
double eta_fixed_point(double s, ServiceKind service, double arrival_rate, double mu,
                       const ToleranceConfig& tol, int max_iter = 1000000);

/// E[exp(-s W2) 1{W2 > d}] for the exponential-service delayed APQ.
double class2_tail_lst(const QueueConfig& config, double s, const ToleranceConfig& tol);

/// FCFS waiting time (both service kinds; Pollaczek-Khinchine for deterministic).
Lst fcfs_wait_lst(const QueueConfig& config);
/// Service time transform.
Lst service_lst(const QueueConfig& config);

/// Value of the CDF of `transform` at t > 0 by Euler-summation inversion of
/// transform(s)/s. Returns the value and the error estimate.
struct InversionPoint {
  double value = 0.0;
  double error = 0.0;
};
InversionPoint invert_point(const Lst& transform, double t, const ToleranceConfig& tol);

/// Inverts on a grid, monotonizes by running maximum and clamps into [0,1].
/// Throws AccuracyNotMet when an error estimate exceeds eps_invert.
CdfCurve invert_to_cdf(const Lst& transform, const std::vector<double>& grid, const ToleranceConfig& tol);

/// Class-2 waiting-time CDF of the exponential-service delayed APQ for a fixed
/// (lambda1, lambda2, mu, d). The survival weights do not depend on b, so one
/// engine answers queries for any b cheaply.
///
/// Below d the delayed and plain priority waits agree in law. Past d,
/// F(t) = 1 - P[W > d] + P[d < W <= t], and the last term inverts
/// sum_j v_j eta(s)^j / s at t - d.
class Class2Cdf {
 public:
  Class2Cdf(const QueueConfig& config, const ToleranceConfig& tol);

  double at(double b, double t) const;
  CdfCurve curve(double b, const std::vector<double>& grid) const;
  /// P[W2 > d], identical for every b.
  double survival_mass() const { return survival_mass_; }
  /// sum_j v_j eta(s)^j with eta at accreditation rate lambda1 (1 - b).
  cplx continuation(double b, cplx s) const;

 private:
  double evaluate(double b, double t, double* error) const;
  double npq_below_d(double t, double* error) const;

  QueueConfig config_;
  ToleranceConfig tol_;
  std::vector<double> weights_;      // v_j
  std::vector<double> stationary_;   // pi_j, j >= 1 at index j
  double survival_mass_ = 0.0;
};

CdfCurve class2_cdf_dapq(const QueueConfig& config, const std::vector<double>& grid, const ToleranceConfig& tol);

}  // namespace dapq
