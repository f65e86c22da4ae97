// Euler summation inversion of Laplace transforms (Fourier series on the
// Bromwich contour, binomial averaging of the alternating partial sums).

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "dapq/transforms.hpp"

namespace dapq {

namespace {

constexpr double kA = 18.4;  // discretization error about exp(-A)
constexpr int kM = 11;       // binomial averaging order
constexpr std::array<int, 3> kTerms = {38, 76, 152};

double binomial_average(const std::vector<double>& partial, int n) {
  double acc = 0.0;
  double coef = 1.0;  // C(m, j)
  for (int j = 0; j <= kM; ++j) {
    acc += coef * partial[static_cast<std::size_t>(n + j)];
    coef = coef * (kM - j) / (j + 1);
  }
  return acc / std::pow(2.0, kM);
}

InversionPoint euler(const Lst& transform, double t, int n) {
  const double scale = std::exp(kA / 2.0) / t;
  auto f = [&](cplx s) { return (transform.eval(s) / s).real(); };
  const std::size_t count = static_cast<std::size_t>(n + kM + 2);
  std::vector<double> partial(count);
  double sum = 0.5 * f(cplx(kA / (2.0 * t), 0.0));
  partial[0] = scale * sum;
  for (std::size_t k = 1; k < count; ++k) {
    const cplx s(kA / (2.0 * t), static_cast<double>(k) * M_PI / t);
    const double term = f(s);
    sum += (k % 2 == 1) ? -term : term;
    partial[k] = scale * sum;
  }
  const double e0 = binomial_average(partial, n);
  const double e1 = binomial_average(partial, n + 1);
  InversionPoint out;
  out.value = e0;
  out.error = std::abs(e0 - e1) + std::exp(-kA) / (1.0 - std::exp(-kA));
  return out;
}

}  // namespace

InversionPoint invert_point(const Lst& transform, double t, const ToleranceConfig& tol) {
  if (!(t > 0.0)) throw Error(ErrorKind::OutOfRange, "inversion needs t > 0");
  InversionPoint best;
  for (std::size_t i = 0; i < kTerms.size(); ++i) {
    const InversionPoint p = euler(transform, t, kTerms[i]);
    if (!std::isfinite(p.value)) continue;
    if (i == 0 || p.error < best.error) best = p;
    if (best.error <= tol.eps_invert) break;
  }
  if (!std::isfinite(best.value))
    throw Error(ErrorKind::NumericalInstability, "transform inversion produced a non-finite value");
  return best;
}

CdfCurve invert_to_cdf(const Lst& transform, const std::vector<double>& grid, const ToleranceConfig& tol) {
  if (grid.empty()) throw Error(ErrorKind::OutOfRange, "empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0)
    throw Error(ErrorKind::OutOfRange, "grid must be nonnegative and increasing");
  CdfCurve c;
  c.provenance = "inverted";
  c.t = grid;
  c.F.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == 0.0) {
      c.F[i] = transform.atom;
      continue;
    }
    const InversionPoint p = invert_point(transform, grid[i], tol);
    c.max_error_estimate = std::max(c.max_error_estimate, p.error);
    if (p.error > tol.eps_invert) {
      std::ostringstream msg;
      msg << "inversion error estimate " << p.error << " at t = " << grid[i] << " exceeds " << tol.eps_invert;
      throw Error(ErrorKind::AccuracyNotMet, msg.str());
    }
    c.F[i] = p.value;
  }
  double running = 0.0;
  for (double& v : c.F) {
    const double fixed = std::clamp(std::max(v, running), 0.0, 1.0);
    c.max_monotone_adjust = std::max(c.max_monotone_adjust, std::abs(fixed - v));
    v = fixed;
    running = fixed;
  }
  return c;
}

double CdfCurve::at(double x) const {
  if (t.empty() || x < t.front()) return 0.0;
  if (x >= t.back()) return F.back();
  const auto hi = std::upper_bound(t.begin(), t.end(), x);
  const std::size_t j = static_cast<std::size_t>(hi - t.begin());
  const double w = (x - t[j - 1]) / (t[j] - t[j - 1]);
  return F[j - 1] + w * (F[j] - F[j - 1]);
}

}  // namespace dapq
