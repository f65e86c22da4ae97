#include "dapq/kpi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dapq/approx.hpp"
#include "dapq/mean_wait.hpp"
#include "dapq/transforms.hpp"
#include "dapq/detail/numeric.hpp"

namespace dapq {

namespace {

constexpr int kMonotoneGrid = 10;

void fill_means(PolicyPoint& pt, const QueueConfig& config, const ToleranceConfig& tol) {
  QueueConfig c = config;
  c.b = pt.b_star;
  const WaitSummary s = dapq_means(c, tol);
  pt.mean_w1 = s.mean_w1;
  pt.mean_w2 = s.mean_w2;
}

}  // namespace

PolicyPoint b_star_class2(const QueueConfig& config, const Kpi& kpi, const ToleranceConfig& tol) {
  kpi.validate();
  if (kpi.class_index != 2) throw Error(ErrorKind::OutOfRange, "class-2 target expected");
  if (config.service != ServiceKind::Exponential)
    throw Error(ErrorKind::Unsupported, "class-2 targets need exponential service");
  validate(config);
  const Class2Cdf cdf(config, tol);
  auto f = [&](double b) { return cdf.at(b, kpi.target_w); };

  // the bisection relies on F(w) rising with b; check it instead of assuming it
  double prev = f(0.0);
  const double slack = 10.0 * tol.eps_invert;
  for (int i = 1; i <= kMonotoneGrid; ++i) {
    const double b = static_cast<double>(i) / kMonotoneGrid;
    const double cur = f(b);
    if (cur < prev - slack) {
      std::ostringstream msg;
      msg << "P(W2 <= " << kpi.target_w << ") falls from " << prev << " to " << cur << " at b = " << b;
      throw Error(ErrorKind::NonMonotone, msg.str());
    }
    prev = cur;
  }

  PolicyPoint pt;
  pt.d = config.d;
  const double p = kpi.compliance_p;
  if (f(0.0) >= p) {
    pt.b_star = 0.0;
    pt.feasible = true;
  } else if (f(1.0) < p) {
    pt.b_star = 1.0;
    pt.feasible = false;
  } else {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol.eps_root) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) >= p ? hi : lo) = mid;
    }
    pt.b_star = hi;
    pt.feasible = true;
  }
  pt.constraint = f(pt.b_star);
  fill_means(pt, config, tol);
  return pt;
}

PolicyPoint b_star_class1(const QueueConfig& config, const Kpi& kpi, const ToleranceConfig& tol) {
  kpi.validate();
  if (kpi.class_index != 1) throw Error(ErrorKind::OutOfRange, "class-1 target expected");
  const DerivedRates r = validate(config);
  auto mean_w1 = [&](double b) {
    QueueConfig c = config;
    c.b = b;
    return dapq_means(c, tol).mean_w1;
  };

  PolicyPoint pt;
  pt.d = config.d;
  const auto threshold = kpi_mean_threshold(r.rho, kpi);
  if (!threshold) {
    pt.b_star = 1.0;
    pt.feasible = true;
  } else {
    double prev = mean_w1(0.0);
    for (int i = 1; i <= kMonotoneGrid; ++i) {
      const double cur = mean_w1(static_cast<double>(i) / kMonotoneGrid);
      if (cur < prev - 1e-9 * std::max(1.0, prev))
        throw Error(ErrorKind::NonMonotone, "class-1 mean decreases in b");
      prev = cur;
    }
    const double m = *threshold;
    if (mean_w1(0.0) > m) {
      pt.b_star = 0.0;
      pt.feasible = false;
    } else if (mean_w1(1.0) <= m) {
      pt.b_star = 1.0;
      pt.feasible = true;
    } else {
      double lo = 0.0, hi = 1.0;
      while (hi - lo > tol.eps_root) {
        const double mid = 0.5 * (lo + hi);
        (mean_w1(mid) <= m ? lo : hi) = mid;
      }
      pt.b_star = lo;
      pt.feasible = true;
    }
  }
  fill_means(pt, config, tol);
  pt.constraint = pt.mean_w1;
  return pt;
}

PolicyPoint b_star(const QueueConfig& config, const Kpi& kpi, const ToleranceConfig& tol) {
  return kpi.class_index == 1 ? b_star_class1(config, kpi, tol) : b_star_class2(config, kpi, tol);
}

double npq_class2_cdf_at(double lambda1, double lambda2, double mu, double w, const ToleranceConfig& tol) {
  const QueueConfig c{lambda1, lambda2, mu, 0.0, 0.0, ServiceKind::Exponential};
  return Class2Cdf(c, tol).at(0.0, w);
}

double fcfs_cdf_at(double lambda1, double lambda2, double mu, double w) {
  const double rho = (lambda1 + lambda2) / mu;
  return 1.0 - rho * std::exp(-(mu - lambda1 - lambda2) * w);
}

double npq_class1_cdf_at(double lambda1, double lambda2, double mu, double w) {
  const double rho = (lambda1 + lambda2) / mu;
  return 1.0 - rho * std::exp(-(mu - lambda1) * w);
}

namespace {

// P(W <= w) under the extreme least (unfavorable) or most (favorable) kind to the target class.
double extreme_cdf(const Kpi& kpi, bool favorable, double l1, double l2, double mu, const ToleranceConfig& tol) {
  if (kpi.class_index == 2)
    return favorable ? fcfs_cdf_at(l1, l2, mu, kpi.target_w) : npq_class2_cdf_at(l1, l2, mu, kpi.target_w, tol);
  return favorable ? npq_class1_cdf_at(l1, l2, mu, kpi.target_w) : fcfs_cdf_at(l1, l2, mu, kpi.target_w);
}

// lambda2 in [0, top] where the extreme's compliance crosses p. The
// compliance falls as lambda2 grows. Returns 0 when it already fails at 0 and
// top when it never fails below it.
double crossing(const Kpi& kpi, bool favorable, double l1, double mu, double top, const ToleranceConfig& tol) {
  auto g = [&](double l2) { return extreme_cdf(kpi, favorable, l1, l2, mu, tol) - kpi.compliance_p; };
  if (g(0.0) < 0.0) return 0.0;
  if (g(top) >= 0.0) return top;
  return detail::bisect(g, 0.0, top, 1e-7 * mu);
}

double interpolate(const std::vector<RatePoint>& pts, double l1) {
  const auto hi = std::lower_bound(pts.begin(), pts.end(), l1,
                                   [](const RatePoint& p, double x) { return p.lambda1 < x; });
  if (hi == pts.begin()) return hi->lambda2;
  const auto lo = hi - 1;
  const double w = (l1 - lo->lambda1) / (hi->lambda1 - lo->lambda1);
  return lo->lambda2 + w * (hi->lambda2 - lo->lambda2);
}

}  // namespace

bool FeasibleRegion::contains(double l1, double l2) const {
  if (lower.empty() || l1 < lower.front().lambda1 || l1 > lower.back().lambda1) return false;
  return l2 > interpolate(lower, l1) && l2 < interpolate(upper, l1);
}

FeasibleRegion feasible_region(const Kpi& kpi, double mu, double resolution, const ToleranceConfig& tol) {
  kpi.validate();
  if (!(resolution > 0.0) || !(mu > 0.0)) throw Error(ErrorKind::OutOfRange, "resolution and mu must be positive");
  FeasibleRegion region;
  region.kpi = kpi;
  region.mu = mu;
  const auto steps = static_cast<long>(std::floor(mu / resolution));
  for (long i = 1; i < steps; ++i) {
    const double l1 = resolution * static_cast<double>(i);
    // the unfavorable extreme fails no later than the favorable one
    const double hi = crossing(kpi, true, l1, mu, (mu - l1) * (1.0 - 1e-9), tol);
    const double lo = crossing(kpi, false, l1, mu, hi, tol);
    if (hi <= lo) continue;
    region.lower.push_back({l1, lo});
    region.upper.push_back({l1, hi});
  }
  return region;
}

std::string_view to_string(RegionStatus status) {
  switch (status) {
    case RegionStatus::ExtremeSuffices: return "extreme-suffices";
    case RegionStatus::Tunable: return "tunable";
    case RegionStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

RegionStatus classify_rates(const Kpi& kpi, double l1, double l2, double mu, const ToleranceConfig& tol) {
  kpi.validate();
  validate(QueueConfig{l1, l2, mu, 0.0, 0.0, ServiceKind::Exponential});
  if (extreme_cdf(kpi, false, l1, l2, mu, tol) >= kpi.compliance_p) return RegionStatus::ExtremeSuffices;
  if (extreme_cdf(kpi, true, l1, l2, mu, tol) < kpi.compliance_p) return RegionStatus::Infeasible;
  return RegionStatus::Tunable;
}

PolicySweep policy_sweep(const QueueConfig& config, const Kpi& kpi, const std::vector<double>& d_values,
                         const ToleranceConfig& tol) {
  PolicySweep sweep;
  for (double d : d_values) {
    QueueConfig c = config;
    c.d = d;
    sweep.points.push_back(b_star(c, kpi, tol));
  }
  std::ostringstream note;
  if (kpi.class_index == 2) {
    double prev = -1.0;
    for (const PolicyPoint& p : sweep.points) {
      if (!p.feasible) continue;
      if (p.mean_w1 < prev - 1e-9) {
        sweep.trend_holds = false;
        note << "E[W1] drops to " << p.mean_w1 << " at d = " << p.d << "; ";
      }
      prev = std::max(prev, p.mean_w1);
    }
    if (sweep.trend_holds) note << "E[W1] nondecreasing along feasible (d, b*)";
  } else {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const PolicyPoint& p : sweep.points) {
      if (!p.feasible || p.b_star <= 0.0 || p.b_star >= 1.0) continue;
      lo = any ? std::min(lo, p.mean_w2) : p.mean_w2;
      hi = any ? std::max(hi, p.mean_w2) : p.mean_w2;
      any = true;
    }
    sweep.trend_holds = !any || hi - lo <= 1e-4;
    note << "E[W2] spread " << (hi - lo) << " over interior (d, b*)";
  }
  sweep.trend = note.str();
  return sweep;
}

}  // namespace dapq
