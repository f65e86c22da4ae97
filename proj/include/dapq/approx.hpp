#pragma once

#include <optional>
#include <vector>

#include "dapq/core.hpp"
#include "dapq/transforms.hpp"

namespace dapq {

/// Atom 1 - rho_mass at zero plus an exponential tail of rate alpha.
struct ZExp {
  double rho_mass = 0.0;
  double alpha = 1.0;

  double mean() const { return rho_mass / alpha; }
};

/// The atom is pinned to the occupancy; only the tail rate is fitted.
ZExp zexp_from_mean(double rho, double mean_w);
double zexp_cdf(const ZExp& z, double t);
CdfCurve zexp_curve(const ZExp& z, const std::vector<double>& grid);

struct SupDiff {
  double max_abs_diff = 0.0;
  double argmax_t = 0.0;
};

/// Largest pointwise gap over the union of both grids restricted to their
/// common range, each curve linearly interpolated.
SupDiff cdf_sup_diff(const CdfCurve& a, const CdfCurve& b);

/// Largest class-1 mean that still gives P(W1 < w) >= p under the Z-Exp
/// model. std::nullopt means the atom alone already meets the target.
std::optional<double> kpi_mean_threshold(double rho, const Kpi& kpi);

}  // namespace dapq
