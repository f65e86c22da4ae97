#include "dapq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <random>

namespace dapq {

void SimConfig::validate() const {
  dapq::validate(queue);
  if (n_customers < 1) throw Error(ErrorKind::OutOfRange, "n_customers must be at least 1");
  if (replications < 1) throw Error(ErrorKind::OutOfRange, "replications must be at least 1");
  if (queue.lambda1 + queue.lambda2 <= 0.0) throw Error(ErrorKind::OutOfRange, "no arrivals to simulate");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}
  // (0,1]: never zero so the logarithm stays finite
  double uniform() { return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  std::mt19937_64 gen_;
};

struct Waiting {
  double arrival;
  std::size_t found;
};

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::size_t rep) {
  return splitmix64(splitmix64(seed) ^ splitmix64(0x5eedULL + rep));
}

std::vector<WaitRecord> run_single(const SimConfig& sim, std::size_t rep) {
  sim.validate();
  const QueueConfig& q = sim.queue;
  const double lambda = q.lambda1 + q.lambda2;
  const double p1 = q.lambda1 / lambda;
  Stream rng(substream_seed(sim.seed, rep));
  auto service = [&]() { return q.service == ServiceKind::Exponential ? rng.exponential(q.mu) : 1.0 / q.mu; };

  const std::size_t total = sim.burn_in + sim.n_customers;
  std::vector<WaitRecord> out;
  out.reserve(sim.n_customers);
  std::deque<Waiting> queue1, queue2;
  std::size_t in_system = 0;
  std::size_t started = 0;
  constexpr double idle = std::numeric_limits<double>::infinity();
  double next_arrival = rng.exponential(lambda);
  double busy_until = idle;

  auto start = [&](int cls, const Waiting& c, double now) {
    if (started >= sim.burn_in) out.push_back({cls, c.arrival, now - c.arrival, c.found});
    ++started;
    busy_until = now + service();
  };

  while (started < total) {
    if (next_arrival < busy_until) {
      const double now = next_arrival;
      const int cls = rng.uniform() <= p1 ? 1 : 2;
      const Waiting c{now, in_system};
      ++in_system;
      if (busy_until == idle)
        start(cls, c, now);
      else
        (cls == 1 ? queue1 : queue2).push_back(c);
      next_arrival = now + rng.exponential(lambda);
    } else {
      const double now = busy_until;
      --in_system;
      busy_until = idle;
      if (queue1.empty() && queue2.empty()) continue;
      int pick;
      if (queue2.empty()) {
        pick = 1;
      } else if (queue1.empty()) {
        pick = 2;
      } else {
        const double a1 = queue1.front().arrival;
        const double a2 = queue2.front().arrival;
        const double c1 = now - a1;
        const double c2 = q.b * std::max(0.0, now - a2 - q.d);
        if (c1 != c2)
          pick = c1 > c2 ? 1 : 2;
        else
          pick = a2 < a1 ? 2 : 1;
      }
      auto& from = pick == 1 ? queue1 : queue2;
      const Waiting c = from.front();
      from.pop_front();
      start(pick, c, now);
    }
  }
  return out;
}

namespace {

struct Accumulator {
  std::vector<double> cdf_sum;
  std::vector<double> means;
  std::vector<double> waits;  // last replication, for batch means
  std::size_t count = 0;
};

void add_replication(Accumulator& acc, std::vector<double>& waits, const std::vector<double>& grid) {
  if (waits.empty()) return;
  acc.count += waits.size();
  double sum = 0.0;
  for (double w : waits) sum += w;
  acc.means.push_back(sum / static_cast<double>(waits.size()));
  acc.waits = waits;
  std::sort(waits.begin(), waits.end());
  const double n = static_cast<double>(waits.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto le = std::upper_bound(waits.begin(), waits.end(), grid[i]) - waits.begin();
    acc.cdf_sum[i] += static_cast<double>(le) / n;
  }
}

double std_error(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0) / n);
}

ClassSample finish(const Accumulator& acc, const std::vector<double>& grid) {
  ClassSample s;
  s.cdf.provenance = "empirical";
  s.cdf.t = grid;
  s.cdf.F.assign(grid.size(), 0.0);
  s.count = acc.count;
  s.rep_means = acc.means;
  if (acc.means.empty()) return s;
  const double reps = static_cast<double>(acc.means.size());
  for (std::size_t i = 0; i < grid.size(); ++i) s.cdf.F[i] = acc.cdf_sum[i] / reps;
  for (double m : acc.means) s.mean += m;
  s.mean /= reps;
  if (acc.means.size() >= 2) {
    s.std_error = std_error(acc.means);
  } else {
    constexpr std::size_t batches = 20;
    const std::size_t per = acc.waits.size() / batches;
    std::vector<double> batch_means;
    for (std::size_t b = 0; per > 0 && b < batches; ++b) {
      double sum = 0.0;
      for (std::size_t i = b * per; i < (b + 1) * per; ++i) sum += acc.waits[i];
      batch_means.push_back(sum / static_cast<double>(per));
    }
    s.std_error = std_error(batch_means);
  }
  return s;
}

}  // namespace

EmpiricalCdf run_replicated(const SimConfig& sim, const std::vector<double>& grid) {
  sim.validate();
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error(ErrorKind::OutOfRange, "grid must be increasing");
  Accumulator acc1, acc2;
  acc1.cdf_sum.assign(grid.size(), 0.0);
  acc2.cdf_sum.assign(grid.size(), 0.0);
  for (std::size_t rep = 0; rep < sim.replications; ++rep) {
    const std::vector<WaitRecord> records = run_single(sim, rep);
    std::vector<double> w1, w2;
    for (const WaitRecord& r : records) (r.cls == 1 ? w1 : w2).push_back(r.wait);
    add_replication(acc1, w1, grid);
    add_replication(acc2, w2, grid);
  }
  EmpiricalCdf out;
  out.class1 = finish(acc1, grid);
  out.class2 = finish(acc2, grid);
  out.replications = sim.replications;
  return out;
}

void write_records_csv(std::ostream& out, std::size_t rep, const std::vector<WaitRecord>& records, bool header) {
  if (header) out << "rep,class,arrival,wait\n";
  char buf[96];
  for (const WaitRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%.12g,%.12g\n", rep, r.cls, r.arrival, r.wait);
    out << buf;
  }
}

}  // namespace dapq
