#include "dapq/mean_wait.hpp"

#include <cmath>

#include "dapq/detail/numeric.hpp"

namespace dapq {

double fcfs_mean(const QueueConfig& config) {
  const DerivedRates r = validate(config);
  const double scale = config.service == ServiceKind::Exponential ? 1.0 : 0.5;
  return scale * r.rho / (config.mu * (1.0 - r.rho));
}

double npq_class2_mean(const QueueConfig& config) {
  const DerivedRates r = validate(config);
  const double scale = config.service == ServiceKind::Exponential ? 1.0 : 0.5;
  return scale * r.rho / (config.mu * (1.0 - r.rho1) * (1.0 - r.rho));
}

double npq_class1_mean(const QueueConfig& config) {
  const DerivedRates r = validate(config);
  const double scale = config.service == ServiceKind::Exponential ? 1.0 : 0.5;
  return scale * r.rho / (config.mu * (1.0 - r.rho1));
}

XTable::XTable(const DerivedRates& rates, std::size_t k_max)
    : rho_(rates.rho), r_(rates.r_coef), k_max_(k_max), rows_(k_max + 1) {
  const double p = rates.p_up;
  const double q = rates.q_down;
  for (std::size_t k = 1; k <= k_max; ++k) {
    auto& row = rows_[k];
    row.resize(k);
    for (std::size_t l = 1; l <= k; ++l) {
      const double below = l >= 2 ? at(k - 1, l - 1) : 0.0;
      row[l - 1] = p * below + q * at(k - 1, l + 1);
    }
  }
}

double XTable::at(std::size_t k, std::size_t l) const {
  if (l == 0) return 0.0;
  if (l > k) return std::pow(rho_, static_cast<double>(l - k)) * std::pow(r_, static_cast<double>(k));
  if (k > k_max_) throw Error(ErrorKind::OutOfRange, "x-table row beyond k_max");
  return rows_[k][l - 1];
}

XTable x_table(const DerivedRates& rates, std::size_t k_max) {
  if (k_max < 1) throw Error(ErrorKind::OutOfRange, "x-table needs k_max >= 1");
  return XTable(rates, k_max);
}

double mm1_dapq_class2_mean(const QueueConfig& config, const ToleranceConfig& tol) {
  const DerivedRates r = validate(config);
  if (config.service != ServiceKind::Exponential)
    throw Error(ErrorKind::Unsupported, "exponential service expected");
  const double npq = npq_class2_mean(config);
  if (config.b == 0.0 || r.rho1 == 0.0) return npq;

  const double nud = r.nu * config.d;
  // Summands are bounded by E[N] + k, so shrink the Poisson tail accordingly.
  const double bound = r.rho / (1.0 - r.rho) + nud + 10.0 * std::sqrt(nud + 1.0) + 10.0;
  const std::vector<double> w = detail::poisson_weights(nud, tol.eps_series / (2.0 * bound), tol.max_states);
  const std::size_t k_max = w.size() - 1;

  detail::Sum inside;
  if (k_max >= 1) {
    const XTable x(r, k_max);
    for (std::size_t k = k_max; k >= 1; --k) {
      detail::Sum row;
      for (std::size_t l = k; l >= 1; --l) row.add(static_cast<double>(l) * x.at(k, l));
      inside.add(w[k] * row.value());
    }
  }
  const double closed =
      r.rho * std::exp(-nud * (1.0 - r.r_coef)) * (1.0 / (1.0 - r.rho) + r.r_coef * nud);
  const double expectation = (1.0 - r.rho) * inside.value() + closed;
  const double c = r.rho1 * config.b / (config.mu * (1.0 - r.rho1_acc) * (1.0 - r.rho1));
  return npq - c * expectation;
}

WaitSummary dapq_means(const QueueConfig& config, const ToleranceConfig& tol) {
  const DerivedRates r = validate(config);
  if (r.rho1 <= 0.0) throw Error(ErrorKind::NoClass1, "class-1 arrival rate is zero");
  WaitSummary s;
  s.mean_w2 = config.service == ServiceKind::Exponential ? mm1_dapq_class2_mean(config, tol)
                                                         : md1_dapq_class2_mean(config, tol);
  s.mean_w1 = class1_mean_from_class2(config, s.mean_w2);
  s.conservation_residual = conservation_residual(config, s.mean_w1, s.mean_w2);
  return s;
}

WaitSummary interpolated_mean(const QueueConfig& config, double scv, const ToleranceConfig& tol) {
  if (!(scv >= 0.0 && scv <= 1.0)) throw Error(ErrorKind::OutOfRange, "scv must lie in [0,1]");
  QueueConfig m = config;
  m.service = ServiceKind::Exponential;
  QueueConfig d = config;
  d.service = ServiceKind::Deterministic;
  const WaitSummary a = dapq_means(m, tol);
  const WaitSummary b = dapq_means(d, tol);
  WaitSummary s;
  s.mean_w1 = scv * a.mean_w1 + (1.0 - scv) * b.mean_w1;
  s.mean_w2 = scv * a.mean_w2 + (1.0 - scv) * b.mean_w2;
  // the conservation right-hand side is linear in E[S^2], so the blend obeys it too
  const DerivedRates r = validate(config);
  const double rhs = scv * conservation_rhs(m) + (1.0 - scv) * conservation_rhs(d);
  s.conservation_residual = std::abs(r.rho1 * s.mean_w1 + r.rho2 * s.mean_w2 - rhs);
  return s;
}

}  // namespace dapq
