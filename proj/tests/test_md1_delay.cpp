#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "dapq/mean_wait.hpp"

using namespace dapq;

namespace {

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

// E[(r + j - 1) 1{class-1 chain stays busy over [0, l)}] for a class-2
// arrival, by direct simulation: an M/D/1 queue (unit service) supplies the
// arrival's view (N, r) and a class-1-only path is then run from it.
Estimate survivor_work(double lambda1, double lambda2, long ell, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(lambda1 + lambda2);
  std::exponential_distribution<double> gap1(lambda1);
  std::vector<double> departures;  // pending departure times, ascending
  double now = 0.0;
  const std::size_t batches = 20;
  const std::size_t per = samples / batches;
  std::vector<double> batch_sum(batches, 0.0);
  for (std::size_t s = 0; s < 5000 + samples; ++s) {
    now += gap(rng);
    std::size_t gone = 0;
    while (gone < departures.size() && departures[gone] <= now) ++gone;
    departures.erase(departures.begin(), departures.begin() + static_cast<std::ptrdiff_t>(gone));
    if (s >= 5000 && !departures.empty()) {
      const double r = departures.front() - now;
      long level = static_cast<long>(departures.size());
      double t = 0.0;
      bool alive = true;
      for (long m = 0; m < ell && alive; ++m) {
        const double dep = r + static_cast<double>(m);
        while ((t += gap1(rng)) < dep) ++level;
        t = dep;
        alive = --level > 0;
      }
      if (alive) {
        while ((t += gap1(rng)) < static_cast<double>(ell)) ++level;
        const std::size_t b = (s - 5000) / per;
        if (b < batches) batch_sum[b] += r + static_cast<double>(level) - 1.0;
      }
    }
    const double start = departures.empty() ? now : departures.back();
    departures.push_back(start + 1.0);
  }
  Estimate e;
  double sq = 0.0;
  for (double b : batch_sum) {
    e.mean += b / static_cast<double>(per);
    sq += (b / static_cast<double>(per)) * (b / static_cast<double>(per));
  }
  e.mean /= static_cast<double>(batches);
  const double var = (sq / batches - e.mean * e.mean) * batches / (batches - 1.0);
  e.se = std::sqrt(var / batches);
  return e;
}

double implied_work(const QueueConfig& c, const ToleranceConfig& tol) {
  const double rho1 = c.lambda1 / c.mu;
  const double coef = rho1 * c.b / ((1.0 - rho1 * (1.0 - c.b)) * (1.0 - rho1));
  return (npq_class2_mean(c) - md1_dapq_class2_mean(c, tol)) * c.mu / coef;
}

}  // namespace

TEST_CASE("delayed mean matches the simulated survivor work") {
  const ToleranceConfig tol;
  struct Case {
    double l1, l2;
    long ell;
  };
  for (const Case c : {Case{0.5, 0.3, 1}, Case{0.5, 0.3, 3}, Case{0.2, 0.7, 2}}) {
    CAPTURE(c.l1);
    CAPTURE(c.ell);
    const QueueConfig q{c.l1, c.l2, 1.0, 0.5, static_cast<double>(c.ell), ServiceKind::Deterministic};
    const Estimate e = survivor_work(c.l1, c.l2, c.ell, 2000000, 11 + static_cast<std::uint64_t>(c.ell));
    const double exact = implied_work(q, tol);
    CAPTURE(exact);
    CAPTURE(e.mean);
    CAPTURE(e.se);
    CHECK(std::abs(exact - e.mean) < 4.0 * e.se);
  }
}

TEST_CASE("delayed mean is stable under tighter truncation") {
  ToleranceConfig tight;
  tight.eps_series = 1e-15;
  const ToleranceConfig tol;
  for (double d : {1.0, 2.0, 6.0}) {
    const QueueConfig q{0.5, 0.3, 1.0, 0.5, d, ServiceKind::Deterministic};
    CHECK(std::abs(md1_dapq_class2_mean(q, tol) - md1_dapq_class2_mean(q, tight)) < 1e-11);
  }
}

TEST_CASE("units scale with the service rate") {
  const ToleranceConfig tol;
  const QueueConfig unit{0.5, 0.3, 1.0, 0.5, 2.0, ServiceKind::Deterministic};
  const QueueConfig fast{1.0, 0.6, 2.0, 0.5, 1.0, ServiceKind::Deterministic};
  CHECK(md1_dapq_class2_mean(fast, tol) == doctest::Approx(md1_dapq_class2_mean(unit, tol) / 2.0).epsilon(1e-12));
}

TEST_CASE("reference values") {
  // recorded from an independent prototype of the same construction
  const ToleranceConfig tol;
  CHECK(md1_dapq_class2_mean({0.5, 0.3, 1.0, 0.5, 1.0, ServiceKind::Deterministic}, tol) ==
        doctest::Approx(2.9037874).epsilon(1e-7));
  CHECK(md1_dapq_class2_mean({0.5, 0.3, 1.0, 0.5, 2.0, ServiceKind::Deterministic}, tol) ==
        doctest::Approx(3.0881780).epsilon(1e-7));
  CHECK(md1_dapq_class2_mean({0.2, 0.7, 1.0, 0.5, 2.0, ServiceKind::Deterministic}, tol) ==
        doctest::Approx(5.1728350).epsilon(1e-7));
}

TEST_CASE("delay must be a whole number of services") {
  const ToleranceConfig tol;
  CHECK_THROWS_AS(md1_dapq_class2_mean({0.5, 0.3, 1.0, 0.5, 1.5, ServiceKind::Deterministic}, tol), Error);
  ToleranceConfig small;
  small.max_states = 40;
  CHECK_THROWS_AS(md1_dapq_class2_mean({0.5, 0.3, 1.0, 0.5, 20.0, ServiceKind::Deterministic}, small), Error);
}
