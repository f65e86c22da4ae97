#include "dapq/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "dapq/markov.hpp"
#include "dapq/detail/numeric.hpp"

namespace dapq {

cplx eta_mm1(cplx s, double arrival_rate, double mu) {
  const cplx b = s + mu + arrival_rate;
  const cplx disc = std::sqrt(b * b - 4.0 * mu * arrival_rate);
  const cplx plus = b + disc;
  const cplx minus = b - disc;
  return 2.0 * mu / (std::abs(plus) >= std::abs(minus) ? plus : minus);
}

double eta_mm1(double s, double arrival_rate, double mu) {
  return eta_mm1(cplx(s, 0.0), arrival_rate, mu).real();
}

double eta_fixed_point(double s, ServiceKind service, double arrival_rate, double mu,
                       const ToleranceConfig& tol, int max_iter) {
  auto lst = [&](double x) {
    return service == ServiceKind::Exponential ? mu / (mu + x) : std::exp(-x / mu);
  };
  double eta = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const double next = lst(s + arrival_rate * (1.0 - eta));
    if (std::abs(next - eta) <= tol.eps_root * 1e-2) return next;
    eta = next;
  }
  throw Error(ErrorKind::NonConvergence, "accreditation interval fixed point did not converge");
}

namespace {

// sum_{j>=1} w_j z^j by Horner from the top
cplx power_series(const std::vector<double>& w, cplx z) {
  cplx acc = 0.0;
  for (std::size_t j = w.size(); j-- > 1;) acc = (acc + w[j]) * z;
  return acc;
}

}  // namespace

double class2_tail_lst(const QueueConfig& config, double s, const ToleranceConfig& tol) {
  const DerivedRates r = validate(config);
  const std::vector<double> v = arrival_survival_weights(config, tol);
  const double eta = eta_mm1(s, r.lambda1_acc, config.mu);
  return std::exp(-s * config.d) * power_series(v, cplx(eta, 0.0)).real();
}

Lst fcfs_wait_lst(const QueueConfig& config) {
  const DerivedRates r = validate(config);
  const double rho = r.rho;
  const double mu = config.mu;
  const double lambda = config.lambda1 + config.lambda2;
  Lst l;
  l.atom = 1.0 - rho;
  if (config.service == ServiceKind::Exponential) {
    l.name = "fcfs-mm1";
    l.eval = [rho, mu, lambda](cplx s) { return (1.0 - rho) + rho * (mu - lambda) / (mu - lambda + s); };
  } else {
    l.name = "fcfs-md1";
    l.eval = [rho, mu, lambda](cplx s) {
      if (std::abs(s) < 1e-12) return cplx(1.0, 0.0);
      return (1.0 - rho) * s / (s - lambda * (1.0 - std::exp(-s / mu)));
    };
  }
  return l;
}

Lst service_lst(const QueueConfig& config) {
  validate(config);
  const double mu = config.mu;
  Lst l;
  if (config.service == ServiceKind::Exponential) {
    l.name = "service-exp";
    l.eval = [mu](cplx s) { return mu / (mu + s); };
  } else {
    l.name = "service-det";
    l.eval = [mu](cplx s) { return std::exp(-s / mu); };
  }
  return l;
}

Class2Cdf::Class2Cdf(const QueueConfig& config, const ToleranceConfig& tol) : config_(config), tol_(tol) {
  validate(config_);
  if (config_.service != ServiceKind::Exponential)
    throw Error(ErrorKind::Unsupported, "class-2 CDFs are available for exponential service only");
  weights_ = arrival_survival_weights(config_, tol_);
  detail::Sum mass;
  for (std::size_t j = weights_.size(); j-- > 1;) mass.add(weights_[j]);
  survival_mass_ = mass.value();
  const StationaryDist pi = mm1_stationary(config_.rho(), tol_);
  stationary_.assign(pi.truncation_K + 1, 0.0);
  for (std::size_t j = 1; j <= pi.truncation_K; ++j) stationary_[j] = pi.prob(j);
}

cplx Class2Cdf::continuation(double b, cplx s) const {
  return power_series(weights_, eta_mm1(s, config_.lambda1 * (1.0 - b), config_.mu));
}

double Class2Cdf::npq_below_d(double t, double* error) const {
  const double rho = config_.rho();
  if (t <= 0.0) return 1.0 - rho;
  const double lambda1 = config_.lambda1;
  const double mu = config_.mu;
  Lst busy;
  busy.name = "npq-class2-busy";
  busy.mass = rho;
  busy.eval = [this, lambda1, mu](cplx s) { return power_series(stationary_, eta_mm1(s, lambda1, mu)); };
  const InversionPoint p = invert_point(busy, t, tol_);
  *error = std::max(*error, p.error);
  if (p.error > tol_.eps_invert)
    throw Error(ErrorKind::AccuracyNotMet, "class-2 inversion below the delay missed eps_invert");
  return (1.0 - rho) + p.value;
}

double Class2Cdf::at(double b, double t) const {
  double error = 0.0;
  return evaluate(b, t, &error);
}

double Class2Cdf::evaluate(double b, double t, double* error) const {
  if (b < 0.0 || b > 1.0) throw Error(ErrorKind::OutOfRange, "b must lie in [0,1]");
  if (t < 0.0) return 0.0;
  if (t <= config_.d) return std::clamp(npq_below_d(t, error), 0.0, 1.0);
  Lst tail;
  tail.name = "class2-continuation";
  tail.mass = survival_mass_;
  tail.eval = [this, b](cplx s) { return continuation(b, s); };
  const InversionPoint p = invert_point(tail, t - config_.d, tol_);
  *error = std::max(*error, p.error);
  if (p.error > tol_.eps_invert)
    throw Error(ErrorKind::AccuracyNotMet, "class-2 inversion past the delay missed eps_invert");
  return std::clamp(1.0 - survival_mass_ + p.value, 0.0, 1.0);
}

CdfCurve Class2Cdf::curve(double b, const std::vector<double>& grid) const {
  if (grid.empty()) throw Error(ErrorKind::OutOfRange, "empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw Error(ErrorKind::OutOfRange, "grid must be increasing");
  CdfCurve c;
  c.provenance = "inverted";
  c.t = grid;
  c.F.resize(grid.size());
  double running = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double raw = evaluate(b, grid[i], &c.max_error_estimate);
    const double fixed = std::max(raw, running);
    c.max_monotone_adjust = std::max(c.max_monotone_adjust, fixed - raw);
    c.F[i] = fixed;
    running = fixed;
  }
  return c;
}

CdfCurve class2_cdf_dapq(const QueueConfig& config, const std::vector<double>& grid, const ToleranceConfig& tol) {
  return Class2Cdf(config, tol).curve(config.b, grid);
}

}  // namespace dapq
