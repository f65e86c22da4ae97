#include "dapq/approx.hpp"

#include <algorithm>
#include <cmath>

namespace dapq {

ZExp zexp_from_mean(double rho, double mean_w) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::OutOfRange, "occupancy must lie in (0,1)");
  if (!(mean_w >= 0.0)) throw Error(ErrorKind::OutOfRange, "mean must be nonnegative");
  if (mean_w == 0.0) throw Error(ErrorKind::DegenerateMean, "zero mean with positive occupancy");
  return ZExp{rho, rho / mean_w};
}

double zexp_cdf(const ZExp& z, double t) {
  if (t < 0.0) return 0.0;
  return 1.0 - z.rho_mass * std::exp(-z.alpha * t);
}

CdfCurve zexp_curve(const ZExp& z, const std::vector<double>& grid) {
  CdfCurve c;
  c.provenance = "approximate";
  c.t = grid;
  c.F.reserve(grid.size());
  for (double t : grid) c.F.push_back(zexp_cdf(z, t));
  return c;
}

SupDiff cdf_sup_diff(const CdfCurve& a, const CdfCurve& b) {
  if (a.t.empty() || b.t.empty()) throw Error(ErrorKind::EmptyOverlap, "empty curve");
  const double lo = std::max(a.t.front(), b.t.front());
  const double hi = std::min(a.t.back(), b.t.back());
  if (lo > hi) throw Error(ErrorKind::EmptyOverlap, "curves share no abscissae range");

  std::vector<double> pts;
  for (const auto* c : {&a, &b})
    for (double t : c->t)
      if (t >= lo && t <= hi) pts.push_back(t);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  SupDiff out{0.0, pts.front()};
  for (double t : pts) {
    const double diff = std::abs(a.at(t) - b.at(t));
    if (diff > out.max_abs_diff) out = {diff, t};
  }
  return out;
}

std::optional<double> kpi_mean_threshold(double rho, const Kpi& kpi) {
  kpi.validate();
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::OutOfRange, "occupancy must lie in (0,1)");
  const double miss = 1.0 - kpi.compliance_p;
  if (miss >= rho) return std::nullopt;
  return kpi.target_w * rho / std::log(rho / miss);
}

}  // namespace dapq
