#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dapq/core.hpp"
#include "dapq/transforms.hpp"

namespace dapq {

struct SimConfig {
  QueueConfig queue;
  std::size_t n_customers = 4000;  // recorded per run, after the burn-in
  std::size_t burn_in = 1500;      // served customers discarded first
  std::size_t replications = 50;
  std::uint64_t seed = 20240601;

  void validate() const;
};

struct WaitRecord {
  int cls = 1;
  double arrival = 0.0;
  double wait = 0.0;        // arrival to service start
  std::size_t found = 0;    // number in system seen on arrival
};

/// Seed of replication `rep`, derived from the root seed by splitmix64 so
/// replications are independent of run order.
std::uint64_t substream_seed(std::uint64_t seed, std::size_t rep);

/// One replication in service-start order, burn-in removed.
std::vector<WaitRecord> run_single(const SimConfig& sim, std::size_t rep);

struct ClassSample {
  CdfCurve cdf;                    // pointwise mean of per-replication ECDFs
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> rep_means;
  std::size_t count = 0;
};

struct EmpiricalCdf {
  ClassSample class1;
  ClassSample class2;
  std::size_t replications = 0;
};

/// Standard errors come from replication means; with a single replication
/// they fall back to 20 batch means within the run.
EmpiricalCdf run_replicated(const SimConfig& sim, const std::vector<double>& grid);

/// CSV with header rep,class,arrival,wait.
void write_records_csv(std::ostream& out, std::size_t rep, const std::vector<WaitRecord>& records, bool header);

}  // namespace dapq
