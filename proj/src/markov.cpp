#include "dapq/markov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dapq/detail/numeric.hpp"

namespace dapq {

namespace mp = boost::multiprecision;
using big = mp::cpp_bin_float_50;

double StationaryDist::prob(std::size_t i) const {
  if (i < probs.size()) return probs[i];
  if (probs.empty() || tail_ratio <= 0.0) return 0.0;
  return probs.back() * std::pow(tail_ratio, static_cast<double>(i - (probs.size() - 1)));
}

double StationaryDist::total_mass() const {
  detail::Sum s;
  for (auto it = probs.rbegin(); it != probs.rend(); ++it) s.add(*it);
  if (!probs.empty() && tail_ratio > 0.0) s.add(probs.back() * tail_ratio / (1.0 - tail_ratio));
  return s.value();
}

StationaryDist mm1_stationary(double rho, const ToleranceConfig& tol) {
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorKind::OutOfRange, "occupancy must lie in [0,1)");
  StationaryDist dist;
  dist.tail_ratio = rho;
  if (rho == 0.0) {
    dist.probs = {1.0};
    return dist;
  }
  // smallest K with rho^(K+1) < eps
  const double guess = std::floor(std::log(tol.eps_series) / std::log(rho));
  if (!(guess < static_cast<double>(tol.max_states)))
    throw Error(ErrorKind::TruncationOverflow, "M/M/1 truncation exceeds max_states");
  std::size_t K = guess > 1.0 ? static_cast<std::size_t>(guess) - 1 : 0;
  while (std::pow(rho, static_cast<double>(K + 1)) >= tol.eps_series) ++K;
  while (K > 0 && std::pow(rho, static_cast<double>(K)) < tol.eps_series) --K;
  dist.probs.resize(K + 1);
  double term = 1.0 - rho;
  for (std::size_t i = 0; i <= K; ++i, term *= rho) dist.probs[i] = term;
  dist.truncation_K = K;
  return dist;
}

double md1_pi_exact(double rho_d, std::size_t n, double* digits_lost) {
  if (digits_lost != nullptr) *digits_lost = 0.0;
  const big rho = rho_d;
  const big one_minus = 1 - rho;
  if (n == 0) return rho_d == 0.0 ? 1.0 : static_cast<double>(one_minus);
  if (n == 1) return static_cast<double>(one_minus * (mp::exp(rho) - 1));

  // pi_n = (1-rho) sum_{k=1}^{n} (-1)^{n-k} e^{k rho}
  //        [ (k rho)^{n-k}/(n-k)! + (k rho)^{n-k-1}/(n-k-1)! ]
  big sum = 0;
  big largest = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t m = n - k;
    const big x = rho * k;
    big bracket;
    if (m == 0) {
      bracket = 1;
    } else {
      const big lower = mp::pow(x, static_cast<int>(m - 1)) / mp::tgamma(big(m));
      bracket = lower * (x / m + 1);
    }
    big term = mp::exp(x) * bracket;
    largest = std::max(largest, term);
    if (m % 2 == 1) term = -term;
    sum += term;
  }
  const big value = one_minus * sum;
  if (digits_lost != nullptr && value != 0)
    *digits_lost = static_cast<double>(mp::log10(largest / mp::abs(sum)));
  return static_cast<double>(value);
}

double md1_tail_ratio(double rho, const ToleranceConfig& tol) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::OutOfRange, "occupancy must lie in (0,1)");
  // log form of exp(rho s)/s = exp(rho): g(s) = rho s - ln s - rho; g < 0 at 1/rho
  auto g = [rho](double s) { return rho * s - std::log(s) - rho; };
  const double lo = 1.0 / rho;
  double hi = 2.0 * lo;
  for (int i = 0; i < 200 && g(hi) <= 0.0; ++i) hi *= 2.0;
  if (!(g(lo) < 0.0) || !(g(hi) > 0.0))
    throw Error(ErrorKind::RootBracketFailure, "cannot bracket the M/D/1 tail root");
  const double sigma = detail::bisect(g, lo, hi, tol.eps_root * lo);
  return 1.0 / sigma;
}

StationaryDist md1_stationary(double rho, const ToleranceConfig& tol) {
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorKind::OutOfRange, "occupancy must lie in [0,1)");
  StationaryDist dist;
  if (rho == 0.0) {
    dist.probs = {1.0};
    return dist;
  }
  const double sigma = md1_tail_ratio(rho, tol);
  dist.tail_ratio = sigma;
  dist.probs = {1.0 - rho, md1_pi_exact(rho, 1)};

  // Agreement well below 1e-4 is needed for the continued mass to close to
  // 1e-8; half of the 50-digit working precision is the cancellation limit.
  constexpr double agree = 1e-11;
  constexpr double max_loss = 25.0;
  const std::size_t cap = std::min<std::size_t>(tol.max_states, 2000);
  int settled = 0;
  for (std::size_t n = 2;; ++n) {
    if (n > cap) throw Error(ErrorKind::TruncationOverflow, "M/D/1 exact terms exceed max_states");
    double lost = 0.0;
    const double pn = md1_pi_exact(rho, n, &lost);
    const double ratio = pn / dist.probs.back();
    if (lost > max_loss) {
      if (std::abs(dist.probs.back() / dist.probs[n - 2] - sigma) > 1e-4 * sigma) {
        std::ostringstream msg;
        msg << "alternating sum lost " << lost << " digits at i = " << n << " before the tail settled";
        throw Error(ErrorKind::NumericalInstability, msg.str());
      }
      break;
    }
    dist.probs.push_back(pn);
    settled = std::abs(ratio - sigma) <= agree * sigma ? settled + 1 : 0;
    if (settled >= 2) break;
  }
  dist.truncation_K = dist.probs.size() - 1;
  return dist;
}

double SurvivalTransition::at(std::size_t i, std::size_t j) const {
  if (i < 1 || j < 1 || i > max_from || j > max_to) return 0.0;
  return probs[(i - 1) * max_to + (j - 1)];
}

double SurvivalTransition::row_sum(std::size_t i) const {
  detail::Sum s;
  for (std::size_t j = 1; j <= max_to; ++j) s.add(at(i, j));
  return s.value();
}

namespace {

struct Uniformized {
  double p = 0.0;
  double q = 0.0;
  std::vector<double> weights;
};

Uniformized uniformize(const QueueConfig& config, const ToleranceConfig& tol) {
  const DerivedRates r = validate(config);
  Uniformized u;
  u.p = r.p_up;
  u.q = r.q_down;
  u.weights = detail::poisson_weights(r.nu * config.d, tol.eps_series / 2.0, tol.max_states);
  return u;
}

// One step of P_+ on a row vector over states 1..n (index 0 holds state 1).
void step_plus(const std::vector<double>& in, std::vector<double>& out, double p, double q) {
  const std::size_t n = in.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double m = in[s];
    if (m == 0.0) continue;
    if (s + 1 < n) out[s + 1] += p * m;
    if (s >= 1) out[s - 1] += q * m;
  }
}

void require_exponential(const QueueConfig& config) {
  if (config.service != ServiceKind::Exponential)
    throw Error(ErrorKind::Unsupported, "survival transition needs exponential service");
}

}  // namespace

SurvivalTransition survival_transition(const QueueConfig& config, const ToleranceConfig& tol) {
  require_exponential(config);
  const Uniformized u = uniformize(config, tol);
  const StationaryDist pi = mm1_stationary(config.rho(), tol);

  SurvivalTransition st;
  st.k_max = u.weights.size() - 1;
  st.max_from = std::max<std::size_t>(pi.truncation_K, 1);
  st.max_to = st.max_from + st.k_max;
  if (st.max_to > tol.max_states)
    throw Error(ErrorKind::TruncationOverflow, "survival transition needs more than max_states states");
  st.probs.assign(st.max_from * st.max_to, 0.0);

  std::vector<double> cur(st.max_to), next(st.max_to), acc(st.max_to);
  for (std::size_t i = 1; i <= st.max_from; ++i) {
    std::fill(cur.begin(), cur.end(), 0.0);
    std::fill(acc.begin(), acc.end(), 0.0);
    cur[i - 1] = 1.0;
    for (std::size_t k = 0; k <= st.k_max; ++k) {
      for (std::size_t j = 0; j < st.max_to; ++j) acc[j] += u.weights[k] * cur[j];
      if (k < st.k_max) {
        step_plus(cur, next, u.p, u.q);
        cur.swap(next);
      }
    }
    std::copy(acc.begin(), acc.end(), st.probs.begin() + static_cast<std::ptrdiff_t>((i - 1) * st.max_to));
  }
  return st;
}

std::vector<double> arrival_survival_weights(const QueueConfig& config, const ToleranceConfig& tol) {
  require_exponential(config);
  const Uniformized u = uniformize(config, tol);
  const StationaryDist pi = mm1_stationary(config.rho(), tol);
  const std::size_t k_max = u.weights.size() - 1;
  const std::size_t n = std::max<std::size_t>(pi.truncation_K, 1) + k_max;
  if (n > tol.max_states)
    throw Error(ErrorKind::TruncationOverflow, "survival weights need more than max_states states");

  std::vector<double> cur(n, 0.0), next(n), acc(n, 0.0);
  for (std::size_t i = 1; i <= pi.truncation_K; ++i) cur[i - 1] = pi.prob(i);
  for (std::size_t k = 0; k <= k_max; ++k) {
    for (std::size_t j = 0; j < n; ++j) acc[j] += u.weights[k] * cur[j];
    if (k < k_max) {
      step_plus(cur, next, u.p, u.q);
      cur.swap(next);
    }
  }
  std::vector<double> v(n + 1, 0.0);
  std::copy(acc.begin(), acc.end(), v.begin() + 1);
  return v;
}

}  // namespace dapq
