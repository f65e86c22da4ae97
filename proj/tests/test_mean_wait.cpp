#include <cmath>
#include <vector>

#include "doctest.h"
#include "dapq/markov.hpp"
#include "dapq/mean_wait.hpp"

using namespace dapq;

namespace {

const ToleranceConfig tol;

QueueConfig mm1(double l1, double l2, double b, double d) { return {l1, l2, 1.0, b, d, ServiceKind::Exponential}; }
QueueConfig md1(double l1, double l2, double b, double d) { return {l1, l2, 1.0, b, d, ServiceKind::Deterministic}; }

// Delay-dependent priority with linear credit and no delay, from the
// standard M/G/1 recursion: W2 = W0 / ((1 - rho)(1 - rho1 (1 - b))).
double linear_credit_class2(const QueueConfig& c) {
  const double rho1 = c.lambda1 / c.mu;
  const double w0 = (c.lambda1 + c.lambda2) * c.service_second_moment() / 2.0;
  return w0 / ((1.0 - c.rho()) * (1.0 - rho1 * (1.0 - c.b)));
}

}  // namespace

TEST_CASE("x-table agrees with explicit products of the killed chain") {
  for (const auto& [l1, l2] : {std::pair{0.5, 0.3}, std::pair{0.2, 0.6}, std::pair{0.2, 0.1}}) {
    CAPTURE(l1);
    const DerivedRates r = validate(mm1(l1, l2, 0.5, 1.0));
    const XTable x = x_table(r, 25);
    const std::size_t n = 200;
    std::vector<double> v(n + 1, 0.0), next(n + 1);
    for (std::size_t l = 1; l <= n; ++l) v[l] = std::pow(r.rho, static_cast<double>(l));
    for (std::size_t k = 1; k <= 25; ++k) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t l = 1; l <= n; ++l) {
        if (l + 1 <= n) next[l + 1] += r.p_up * v[l];
        if (l >= 2) next[l - 1] += r.q_down * v[l];
      }
      v.swap(next);
      for (std::size_t l = 1; l <= 60; ++l) {
        CAPTURE(k);
        CAPTURE(l);
        CHECK(std::abs(x.at(k, l) - v[l]) < 1e-12);
      }
    }
    CHECK(x.at(2, 1) == doctest::Approx(r.q_down * r.rho * r.r_coef).epsilon(1e-14));
  }
  CHECK_THROWS_AS(x_table(validate(mm1(0.5, 0.3, 0.5, 1.0)), 0), Error);
}

TEST_CASE("closed-form extremes") {
  CHECK(fcfs_mean(mm1(0.5, 0.3, 0, 0)) == doctest::Approx(4.0));
  CHECK(fcfs_mean(md1(0.5, 0.3, 0, 0)) == doctest::Approx(2.0));
  CHECK(npq_class2_mean(mm1(0.5, 0.3, 0, 0)) == doctest::Approx(8.0));
  CHECK(npq_class1_mean(mm1(0.5, 0.3, 0, 0)) == doctest::Approx(1.6));
  CHECK(npq_class2_mean(md1(0.5, 0.3, 0, 0)) == doctest::Approx(4.0));
}

TEST_CASE("boundary reductions are exact") {
  for (ServiceKind kind : {ServiceKind::Exponential, ServiceKind::Deterministic}) {
    for (double d : {0.0, 1.0, 3.0}) {
      QueueConfig c{0.4, 0.4, 1.0, 0.0, d, kind};
      const WaitSummary npq = dapq_means(c, tol);
      CHECK(std::abs(npq.mean_w2 - npq_class2_mean(c)) < 1e-10);
      CHECK(std::abs(npq.mean_w1 - npq_class1_mean(c)) < 1e-10);
    }
    const QueueConfig f{0.4, 0.4, 1.0, 1.0, 0.0, kind};
    const WaitSummary s = dapq_means(f, tol);
    CHECK(std::abs(s.mean_w1 - fcfs_mean(f)) < 1e-10);
    CHECK(std::abs(s.mean_w2 - fcfs_mean(f)) < 1e-10);
  }
}

TEST_CASE("no delay matches the linear credit recursion") {
  for (ServiceKind kind : {ServiceKind::Exponential, ServiceKind::Deterministic})
    for (double b : {0.1, 0.5, 0.9}) {
      const QueueConfig c{0.5, 0.3, 1.0, b, 0.0, kind};
      CHECK(dapq_means(c, tol).mean_w2 == doctest::Approx(linear_credit_class2(c)).epsilon(1e-12));
    }
  CHECK(dapq_means(mm1(0.5, 0.3, 0.5, 0.0), tol).mean_w1 == doctest::Approx(3.2));
}

TEST_CASE("M/M/1 correction is the weighted mean survivor level") {
  // sum_j j v_j is the expected class-1 level at d on busy paths
  for (double d : {0.5, 2.0, 5.0}) {
    const QueueConfig c = mm1(0.5, 0.3, 0.5, d);
    const DerivedRates r = validate(c);
    const std::vector<double> v = arrival_survival_weights(c, tol);
    double level = 0.0;
    for (std::size_t j = 1; j < v.size(); ++j) level += static_cast<double>(j) * v[j];
    const double coef = r.rho1 * c.b / (c.mu * (1.0 - r.rho1_acc) * (1.0 - r.rho1));
    CHECK(mm1_dapq_class2_mean(c, tol) == doctest::Approx(npq_class2_mean(c) - coef * level).epsilon(1e-10));
  }
}

TEST_CASE("conservation holds across a grid") {
  for (ServiceKind kind : {ServiceKind::Exponential, ServiceKind::Deterministic})
    for (double b : {0.0, 0.3, 1.0})
      for (double d : {0.0, 1.0, 4.0}) {
        const WaitSummary s = dapq_means({0.3, 0.6, 1.0, b, d, kind}, tol);
        CHECK(s.conservation_residual < 1e-8);
      }
}

TEST_CASE("class-2 mean falls with b and rises with d") {
  for (ServiceKind kind : {ServiceKind::Exponential, ServiceKind::Deterministic}) {
    double prev = 1e300;
    for (double b : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double w = dapq_means({0.5, 0.3, 1.0, b, 2.0, kind}, tol).mean_w2;
      CHECK(w < prev);
      prev = w;
    }
    prev = 0.0;
    for (double d : {0.0, 1.0, 2.0, 4.0, 8.0}) {
      const double w = dapq_means({0.5, 0.3, 1.0, 0.5, d, kind}, tol).mean_w2;
      CHECK(w > prev);
      prev = w;
    }
  }
}

TEST_CASE("long delays approach the priority queue") {
  for (ServiceKind kind : {ServiceKind::Exponential, ServiceKind::Deterministic}) {
    const QueueConfig c{0.3, 0.2, 1.0, 1.0, 80.0, kind};
    CHECK(std::abs(dapq_means(c, tol).mean_w2 - npq_class2_mean(c)) < 1e-6);
  }
}

TEST_CASE("deterministic service waits less") {
  for (double d : {0.0, 1.0, 3.0}) {
    const WaitSummary m = dapq_means(mm1(0.5, 0.3, 0.5, d), tol);
    const WaitSummary det = dapq_means(md1(0.5, 0.3, 0.5, d), tol);
    CHECK(det.mean_w1 < m.mean_w1);
    CHECK(det.mean_w2 < m.mean_w2);
  }
}

TEST_CASE("interpolated means blend and conserve") {
  const QueueConfig c = mm1(0.5, 0.3, 0.5, 2.0);
  const WaitSummary half = interpolated_mean(c, 0.5, tol);
  const WaitSummary a = dapq_means(c, tol);
  const WaitSummary b = dapq_means(md1(0.5, 0.3, 0.5, 2.0), tol);
  CHECK(half.mean_w2 == doctest::Approx(0.5 * (a.mean_w2 + b.mean_w2)));
  CHECK(half.conservation_residual < 1e-8);
  CHECK(interpolated_mean(c, 1.0, tol).mean_w2 == doctest::Approx(a.mean_w2));
  CHECK_THROWS_AS(interpolated_mean(c, 1.5, tol), Error);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(dapq_means(mm1(0.0, 0.5, 0.5, 1.0), tol), Error);
  CHECK_THROWS_AS(md1_dapq_class2_mean(md1(0.5, 0.3, 0.5, 0.5), tol), Error);
  CHECK_THROWS_AS(mm1_dapq_class2_mean(md1(0.5, 0.3, 0.5, 1.0), tol), Error);
  ToleranceConfig small;
  small.max_states = 30;
  CHECK_THROWS_AS(dapq_means(mm1(0.5, 0.45, 0.5, 10.0), small), Error);
}
