#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dapq/errors.hpp"

namespace dapq::detail {

// Neumaier compensated summation.
class Sum {
 public:
  void add(double x) {
    const double t = total_ + x;
    if (std::abs(total_) >= std::abs(x))
      comp_ += (total_ - t) + x;
    else
      comp_ += (x - t) + total_;
    total_ = t;
  }
  double value() const { return total_ + comp_; }

 private:
  double total_ = 0.0;
  double comp_ = 0.0;
};

inline double poisson_pmf(double mean, std::size_t k) {
  if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(-mean + kd * std::log(mean) - std::lgamma(kd + 1.0));
}

// Poisson(mean) weights for k = 0..K where K is the first index after the
// mode whose remaining tail mass is provably below tail_eps. The tail bound
// uses the decreasing ratio mean/(k+1) once past the mode.
inline std::vector<double> poisson_weights(double mean, double tail_eps, std::size_t cap) {
  std::vector<double> w;
  if (mean <= 0.0) return {1.0};
  for (std::size_t k = 0;; ++k) {
    if (k > cap) throw Error(ErrorKind::TruncationOverflow, "Poisson series exceeds the state cap");
    w.push_back(poisson_pmf(mean, k));
    const double next_ratio = mean / static_cast<double>(k + 2);
    if (static_cast<double>(k) > mean && next_ratio < 1.0) {
      const double tail = poisson_pmf(mean, k + 1) / (1.0 - next_ratio);
      if (tail < tail_eps) break;
    }
  }
  return w;
}

// Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect(F&& f, double lo, double hi, double tol, int max_iter = 200) {
  double flo = f(lo);
  const double fhi = f(hi);
  if ((flo > 0.0) == (fhi > 0.0)) throw Error(ErrorKind::RootBracketFailure, "no sign change on bracket");
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace dapq::detail
