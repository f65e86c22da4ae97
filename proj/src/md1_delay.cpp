// Class-2 mean of the delayed APQ with deterministic service.
//
// Work in units of one service time. A class-2 arrival that finds the server
// busy sees N_0 customers and a residual service r. Conditioning on r, the
// class-1 chain during [0, l) is: arrivals at rate lambda1 on [0, r), a
// departure at r, then a departure every unit, then arrivals on the last
// (1 - r). Paths that empty the system before l are dropped. The remaining
// mass at level j contributes its outstanding accreditation time r + j - 1.
//
// N_0 and r are not independent: the service in progress began when the
// queue held k customers (k from the departure-epoch law), and the elapsed
// 1 - r of it added Poisson(lambda (1 - r)) arrivals. Integrating over r by
// Gauss-Legendre avoids expanding the polynomial-times-exponential integrals
// term by term, which cancels badly for j beyond a few tens.

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "dapq/markov.hpp"
#include "dapq/mean_wait.hpp"
#include "dapq/detail/numeric.hpp"

namespace dapq {

namespace {

std::vector<double> poisson_vector(double mean, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = detail::poisson_pmf(mean, k);
  return v;
}

// out = (in * kernel) truncated to in.size()
void convolve(const std::vector<double>& in, const std::vector<double>& kernel, std::vector<double>& out) {
  const std::size_t n = in.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = in[i];
    if (m == 0.0) continue;
    const std::size_t lim = std::min(kernel.size(), n - i);
    for (std::size_t a = 0; a < lim; ++a) out[i + a] += m * kernel[a];
  }
}

// A departure: level j+1 moves to j, and reaching 0 ends the busy spell.
void depart(std::vector<double>& v) {
  for (std::size_t j = 1; j + 1 < v.size(); ++j) v[j] = v[j + 1];
  v.back() = 0.0;
  v[0] = 0.0;
}

struct Md1DelayModel {
  double lambda = 0.0;
  double lambda1 = 0.0;
  long ell = 0;
  std::vector<double> start_level;  // level left behind when a service starts, index 1..
  std::vector<double> unit_arrivals;

  double integrand(double r) const {
    const std::size_t n = start_level.size();
    std::vector<double> v(n), tmp(n);

    const std::vector<double> elapsed = poisson_vector(lambda * (1.0 - r), n);
    convolve(start_level, elapsed, v);
    for (double& x : v) x *= lambda;
    v[0] = 0.0;

    convolve(v, poisson_vector(lambda1 * r, n), tmp);
    v.swap(tmp);
    depart(v);
    for (long m = 2; m <= ell; ++m) {
      convolve(v, unit_arrivals, tmp);
      v.swap(tmp);
      depart(v);
    }
    convolve(v, poisson_vector(lambda1 * (1.0 - r), n), tmp);

    detail::Sum s;
    for (std::size_t j = n; j-- > 1;) s.add((r + static_cast<double>(j) - 1.0) * tmp[j]);
    return s.value();
  }
};

}  // namespace

double md1_dapq_class2_mean(const QueueConfig& config, const ToleranceConfig& tol) {
  const DerivedRates r = validate(config);
  if (config.service != ServiceKind::Deterministic)
    throw Error(ErrorKind::Unsupported, "deterministic service expected");
  long ell = 0;
  if (!delay_is_service_multiple(config.d, config.mu, &ell))
    throw Error(ErrorKind::InvalidDelay, "d must be a whole multiple of 1/mu");

  const double npq = npq_class2_mean(config);
  if (config.b == 0.0 || r.rho1 == 0.0) return npq;
  const double c = r.rho1 * config.b / ((1.0 - r.rho1_acc) * (1.0 - r.rho1));
  if (ell == 0) return npq - c * r.rho / (2.0 * config.mu * (1.0 - r.rho));

  const StationaryDist pi = md1_stationary(r.rho, tol);

  // Levels needed: where the queue-length tail drops below eps, plus room for
  // the class-1 arrivals over the delay.
  std::size_t tail_k = pi.truncation_K;
  if (pi.tail_ratio > 0.0) {
    const double target = 1e-3 * tol.eps_series * (1.0 - pi.tail_ratio);
    const double pk = pi.probs.back();
    if (pk > target)
      tail_k += static_cast<std::size_t>(std::ceil(std::log(target / pk) / std::log(pi.tail_ratio)));
  }
  const double growth = r.rho1 * static_cast<double>(ell + 1);
  const std::size_t n = tail_k + static_cast<std::size_t>(std::ceil(growth + 12.0 * std::sqrt(growth + 1.0) + 12.0));
  if (n > tol.max_states) {
    std::ostringstream msg;
    msg << "M/D/1 delay computation needs " << n << " levels, above max_states";
    throw Error(ErrorKind::TruncationOverflow, msg.str());
  }

  Md1DelayModel model;
  model.lambda = r.rho;
  model.lambda1 = r.rho1;
  model.ell = ell;
  model.start_level.assign(n, 0.0);
  model.start_level[1] = pi.prob(0) + pi.prob(1);
  for (std::size_t k = 2; k < n; ++k) model.start_level[k] = pi.prob(k);
  model.unit_arrivals = poisson_vector(r.rho1, n);

  using boost::math::quadrature::gauss;
  auto f = [&model](double x) { return model.integrand(x); };
  const double expectation = gauss<double, 20>::integrate(f, 0.0, 0.5) + gauss<double, 20>::integrate(f, 0.5, 1.0);
  return npq - c * expectation / config.mu;
}

}  // namespace dapq
