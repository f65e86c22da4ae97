#include "dapq/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dapq/approx.hpp"
#include "dapq/kpi.hpp"
#include "dapq/mean_wait.hpp"
#include "dapq/simulate.hpp"
#include "dapq/transforms.hpp"

namespace dapq {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

constexpr const char* kEnvHelp =
    "Environment overrides for default tolerances:\n"
    "  DAPQ_EPS_SERIES   series truncation tolerance (default 1e-12)\n"
    "  DAPQ_EPS_ROOT     root-finder tolerance (default 1e-10)\n"
    "  DAPQ_EPS_INVERT   transform inversion accuracy (default 1e-7)\n"
    "  DAPQ_MAX_STATES   state-space cap (default 200000)\n"
    "Exit codes: 0 ok, 2 invalid input, 3 infeasible target, 4 numerical failure.";

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct QueueFlags {
  double lam1 = 0.0;
  double lam2 = 0.0;
  double mu = 1.0;
  std::string service = "exp";
  std::string b = "0";
  std::string d = "0";

  QueueConfig config(double bv, double dv) const {
    return QueueConfig{lam1, lam2, mu, bv, dv, parse_service_kind(service)};
  }
  json to_json() const {
    return json{{"lambda1", lam1}, {"lambda2", lam2}, {"mu", mu}, {"service", service}, {"b", b}, {"d", d}};
  }
};

void add_queue_flags(CLI::App* cmd, QueueFlags& q, bool sweeps) {
  cmd->add_option("--lam1", q.lam1, "class-1 arrival rate")->required();
  cmd->add_option("--lam2", q.lam2, "class-2 arrival rate")->required();
  cmd->add_option("--mu", q.mu, "service rate")->capture_default_str();
  cmd->add_option("--service", q.service, "service kind: exp or det")->capture_default_str();
  const char* bh = sweeps ? "accumulation rate, value or start:stop:step" : "accumulation rate";
  const char* dh = sweeps ? "delay, value or start:stop:step" : "delay";
  cmd->add_option("--b", q.b, bh)->capture_default_str();
  cmd->add_option("--d", q.d, dh)->capture_default_str();
}

struct SimFlags {
  std::size_t n = 4000;
  std::size_t burn_in = 1500;
  std::size_t reps = 50;
  std::uint64_t seed = 20240601;

  SimConfig config(const QueueConfig& q) const { return SimConfig{q, n, burn_in, reps, seed}; }
  json to_json() const { return json{{"n", n}, {"burn_in", burn_in}, {"reps", reps}, {"seed", seed}}; }
};

void add_sim_flags(CLI::App* cmd, SimFlags& s) {
  cmd->add_option("--n", s.n, "customers recorded per replication")->capture_default_str();
  cmd->add_option("--burn-in", s.burn_in, "served customers discarded first")->capture_default_str();
  cmd->add_option("--reps", s.reps, "replications")->capture_default_str();
  cmd->add_option("--seed", s.seed, "root seed")->capture_default_str();
}

struct GridFlags {
  double step = 0.0;
  double t_max = 0.0;
  json to_json() const { return json{{"step", step}, {"t_max", t_max}}; }
};

void add_grid_flags(CLI::App* cmd, GridFlags& g) {
  cmd->add_option("--step", g.step, "grid spacing (default 0.05/mu)");
  cmd->add_option("--t-max", g.t_max, "grid end (default: FCFS survival below 1e-6)");
}

double single(const std::string& text, const char* what) {
  const std::vector<double> v = parse_sweep(text);
  if (v.size() != 1) throw Error(ErrorKind::OutOfRange, std::string(what) + " must be a single value here");
  return v.front();
}

json tolerance_json(const ToleranceConfig& t) {
  return json{{"eps_series", t.eps_series}, {"eps_root", t.eps_root}, {"eps_invert", t.eps_invert},
              {"max_states", t.max_states}};
}

// Where CSV goes: a file given by --out, or the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), out_(&fallback) {
    if (!path_.empty()) {
      file_.open(path_, std::ios::binary);
      if (!file_) throw Error(ErrorKind::OutOfRange, "cannot open output file " + path_);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* out_;
};

struct Common {
  std::string out_path;
  std::string manifest_path;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out_path, "CSV output file (manifest goes to <out>.manifest.json)");
  cmd->add_option("--manifest", c.manifest_path, "explicit manifest path");
}

void write_manifest(const Common& c, const std::string& sub, const std::vector<std::string>& args,
                    const json& params, const ToleranceConfig& tol, double seconds, const json& results) {
  std::string path = c.manifest_path;
  if (path.empty() && !c.out_path.empty()) path = c.out_path + ".manifest.json";
  if (path.empty()) return;
  // the replayable argument list leaves out where outputs went
  std::vector<std::string> replay;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out" || args[i] == "--manifest") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0 || args[i].rfind("--manifest=", 0) == 0) continue;
    replay.push_back(args[i]);
  }
  json m;
  m["tool"] = "dapq";
  m["version"] = kVersion;
  m["subcommand"] = sub;
  m["parameters"] = params;
  m["tolerances"] = tolerance_json(tol);
  m["args"] = replay;
  m["output"] = c.out_path;
  m["duration_seconds"] = seconds;
  if (!results.is_null()) m["results"] = results;
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::OutOfRange, "cannot open manifest file " + path);
  f << m.dump(2) << "\n";
}

void write_curve(std::ostream& os, const std::string& kind, const CdfCurve& c) {
  for (std::size_t i = 0; i < c.t.size(); ++i) os << kind << ',' << num(c.t[i]) << ',' << num(c.F[i]) << '\n';
}

int cmd_mean(const QueueFlags& q, const std::optional<double>& scv, std::ostream& os, const ToleranceConfig& tol) {
  const std::vector<double> bs = parse_sweep(q.b);
  const std::vector<double> ds = parse_sweep(q.d);
  os << "lambda1,lambda2,mu,service,b,d,mean_w1,mean_w2,conservation_residual\n";
  for (double d : ds) {
    for (double b : bs) {
      const QueueConfig c = q.config(b, d);
      const WaitSummary s = scv ? interpolated_mean(c, *scv, tol) : dapq_means(c, tol);
      const std::string kind = scv ? "mix" + num(*scv) : std::string(to_string(c.service));
      os << num(c.lambda1) << ',' << num(c.lambda2) << ',' << num(c.mu) << ',' << kind << ',' << num(b) << ','
         << num(d) << ',' << num(s.mean_w1) << ',' << num(s.mean_w2) << ',' << num(s.conservation_residual) << '\n';
    }
  }
  return kExitOk;
}

std::vector<double> grid_for(const QueueConfig& c, const GridFlags& g) {
  return make_grid(c, GridSpec{g.step, g.t_max});
}

CdfCurve closed_form(const std::vector<double>& grid, double atom_mass, double rate) {
  CdfCurve c;
  c.provenance = "closed-form";
  c.t = grid;
  for (double t : grid) c.F.push_back(1.0 - atom_mass * std::exp(-rate * t));
  return c;
}

void require_exp(const QueueConfig& c, const std::string& kind) {
  if (c.service != ServiceKind::Exponential)
    throw Error(ErrorKind::Unsupported, "curve kind '" + kind + "' needs exponential service");
}

json sample_json(const ClassSample& s) {
  return json{{"mean", s.mean}, {"std_error", s.std_error}, {"count", s.count}};
}

int cmd_cdf(const QueueFlags& q, const std::vector<std::string>& kinds, const GridFlags& g, const SimFlags& sf,
            std::ostream& os, const ToleranceConfig& tol) {
  const QueueConfig c = q.config(single(q.b, "--b"), single(q.d, "--d"));
  const DerivedRates r = validate(c);
  const std::vector<double> grid = grid_for(c, g);
  static const std::vector<std::string> known = {"fcfs", "npq1", "npq2", "dapq2", "zexp1", "sim1", "sim2"};
  for (const std::string& k : kinds)
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw Error(ErrorKind::OutOfRange, "unknown curve kind '" + k + "'");

  std::optional<EmpiricalCdf> sim;
  os << "kind,t,F\n";
  for (const std::string& k : known) {
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) continue;
    CdfCurve curve;
    if (k == "fcfs") {
      curve = c.service == ServiceKind::Exponential ? closed_form(grid, r.rho, c.mu * (1.0 - r.rho))
                                                    : invert_to_cdf(fcfs_wait_lst(c), grid, tol);
    } else if (k == "npq1") {
      require_exp(c, k);
      curve = closed_form(grid, r.rho, c.mu - c.lambda1);
    } else if (k == "npq2") {
      require_exp(c, k);
      QueueConfig n = c;
      n.b = 0.0;
      n.d = 0.0;
      curve = class2_cdf_dapq(n, grid, tol);
    } else if (k == "dapq2") {
      require_exp(c, k);
      curve = class2_cdf_dapq(c, grid, tol);
    } else if (k == "zexp1") {
      curve = zexp_curve(zexp_from_mean(r.rho, dapq_means(c, tol).mean_w1), grid);
    } else {
      if (!sim) sim = run_replicated(sf.config(c), grid);
      curve = k == "sim1" ? sim->class1.cdf : sim->class2.cdf;
    }
    write_curve(os, k, curve);
  }
  return kExitOk;
}

int cmd_simulate(const QueueFlags& q, const GridFlags& g, const SimFlags& sf, const std::string& raw,
                 std::ostream& os, std::ostream& err, json& results) {
  const QueueConfig c = q.config(single(q.b, "--b"), single(q.d, "--d"));
  const SimConfig sim = sf.config(c);
  const std::vector<double> grid = grid_for(c, g);
  const EmpiricalCdf e = run_replicated(sim, grid);
  os << "t,F1,F2\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    os << num(grid[i]) << ',' << num(e.class1.cdf.F[i]) << ',' << num(e.class2.cdf.F[i]) << '\n';
  if (!raw.empty()) {
    std::ofstream f(raw, std::ios::binary);
    if (!f) throw Error(ErrorKind::OutOfRange, "cannot open raw output " + raw);
    for (std::size_t rep = 0; rep < sim.replications; ++rep) write_records_csv(f, rep, run_single(sim, rep), rep == 0);
  }
  results = json{{"class1", sample_json(e.class1)}, {"class2", sample_json(e.class2)}};
  err << "class1 mean " << num(e.class1.mean) << " se " << num(e.class1.std_error) << "; class2 mean "
      << num(e.class2.mean) << " se " << num(e.class2.std_error) << '\n';
  return kExitOk;
}

struct KpiFlags {
  int cls = 2;
  double w = 0.0;
  double p = 0.0;
  std::string sweep_d;
  bool region = false;
  double resolution = 0.01;
};

int cmd_kpi(const QueueFlags& q, const KpiFlags& k, std::ostream& os, std::ostream& err, const ToleranceConfig& tol) {
  const Kpi kpi{k.w, k.p, k.cls};
  kpi.validate();
  const ServiceKind service = parse_service_kind(q.service);
  if (k.region) {
    if (k.cls == 2 && service != ServiceKind::Exponential)
      throw Error(ErrorKind::Unsupported, "class-2 regions need exponential service");
    const FeasibleRegion region = feasible_region(kpi, q.mu, k.resolution, tol);
    os << "boundary,lambda1,lambda2\n";
    for (const RatePoint& pt : region.lower) os << "lower," << num(pt.lambda1) << ',' << num(pt.lambda2) << '\n';
    for (const RatePoint& pt : region.upper) os << "upper," << num(pt.lambda1) << ',' << num(pt.lambda2) << '\n';
    return region.lower.empty() ? kExitInfeasible : kExitOk;
  }
  const std::vector<double> ds = k.sweep_d.empty() ? parse_sweep(q.d) : parse_sweep(k.sweep_d);
  const PolicySweep sweep = policy_sweep(q.config(0.0, 0.0), kpi, ds, tol);
  os << "lambda1,lambda2,d,b_star,mean_w1,mean_w2,feasible,constraint\n";
  bool any = false;
  for (const PolicyPoint& pt : sweep.points) {
    os << num(q.lam1) << ',' << num(q.lam2) << ',' << num(pt.d) << ',' << num(pt.b_star) << ',' << num(pt.mean_w1)
       << ',' << num(pt.mean_w2) << ',' << (pt.feasible ? 1 : 0) << ',' << num(pt.constraint) << '\n';
    any = any || pt.feasible;
  }
  if (ds.size() > 1) err << sweep.trend << '\n';
  return any ? kExitOk : kExitInfeasible;
}

int classify(const Error& e) { return e.is_numerical() ? kExitNumerical : kExitInvalidInput; }

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_replay(const std::string& manifest, const std::string& out_path, std::ostream& out, std::ostream& err) {
  std::ifstream f(manifest);
  if (!f) throw Error(ErrorKind::OutOfRange, "cannot read manifest " + manifest);
  json m;
  try {
    m = json::parse(f);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::OutOfRange, std::string("malformed manifest: ") + e.what());
  }
  if (!m.contains("args") || !m["args"].is_array()) throw Error(ErrorKind::OutOfRange, "manifest has no args");
  std::vector<std::string> args = m["args"].get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "replay") throw Error(ErrorKind::OutOfRange, "manifest replays itself");
  if (!out_path.empty()) {
    args.push_back("--out");
    args.push_back(out_path);
  }
  return dispatch(args, out, err);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delayed accumulating priority queue toolkit", "dapq"};
  app.footer(kEnvHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  QueueFlags q;
  SimFlags sf;
  GridFlags gf;
  Common common;
  KpiFlags kf;
  std::optional<double> scv;
  std::vector<std::string> kinds;
  std::string raw;
  std::string replay_manifest;

  auto* mean = app.add_subcommand("mean", "exact class means, optionally swept over b and d");
  add_queue_flags(mean, q, true);
  mean->add_option("--scv", scv, "blend exponential and deterministic results with this squared CV");
  add_common(mean, common);

  auto* cdf = app.add_subcommand("cdf", "waiting-time CDF curves");
  add_queue_flags(cdf, q, false);
  cdf->add_option("--kind", kinds, "fcfs, npq1, npq2, dapq2, zexp1, sim1, sim2")->required();
  add_grid_flags(cdf, gf);
  add_sim_flags(cdf, sf);
  add_common(cdf, common);

  auto* simulate = app.add_subcommand("simulate", "replicated simulation, averaged empirical CDFs");
  add_queue_flags(simulate, q, false);
  add_grid_flags(simulate, gf);
  add_sim_flags(simulate, sf);
  simulate->add_option("--raw", raw, "per-customer CSV dump");
  add_common(simulate, common);

  auto* kpi = app.add_subcommand("kpi", "optimal accumulation rates and feasible regions");
  kpi->add_option("--class", kf.cls, "1 or 2")->capture_default_str();
  kpi->add_option("--w", kf.w, "waiting-time target")->required();
  kpi->add_option("--p", kf.p, "compliance probability")->required();
  kpi->add_option("--lam1", q.lam1, "class-1 arrival rate");
  kpi->add_option("--lam2", q.lam2, "class-2 arrival rate");
  kpi->add_option("--mu", q.mu, "service rate")->capture_default_str();
  kpi->add_option("--service", q.service, "service kind: exp or det")->capture_default_str();
  kpi->add_option("--d", q.d, "delay for a single optimization")->capture_default_str();
  kpi->add_option("--sweep-d", kf.sweep_d, "delays start:stop[:step]");
  kpi->add_flag("--region", kf.region, "feasible region boundaries instead of b*");
  kpi->add_option("--resolution", kf.resolution, "lambda1 spacing for --region")->capture_default_str();
  add_common(kpi, common);

  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("--manifest", replay_manifest, "manifest to replay")->required();
  replay->add_option("--out", common.out_path, "where the replayed CSV goes");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  if (replay->parsed()) return cmd_replay(replay_manifest, common.out_path, out, err);

  const ToleranceConfig tol = ToleranceConfig::from_env();
  const auto start = std::chrono::steady_clock::now();
  std::string sub;
  json params;
  json results;
  int code = kExitOk;
  {
    Sink sink(common.out_path, out);
    std::ostream& os = sink.stream();
    if (mean->parsed()) {
      sub = "mean";
      params = q.to_json();
      if (scv) params["scv"] = *scv;
      code = cmd_mean(q, scv, os, tol);
    } else if (cdf->parsed()) {
      sub = "cdf";
      params = q.to_json();
      params["kinds"] = kinds;
      params["grid"] = gf.to_json();
      params["simulation"] = sf.to_json();
      code = cmd_cdf(q, kinds, gf, sf, os, tol);
    } else if (simulate->parsed()) {
      sub = "simulate";
      params = q.to_json();
      params["grid"] = gf.to_json();
      params["simulation"] = sf.to_json();
      code = cmd_simulate(q, gf, sf, raw, os, err, results);
    } else {
      sub = "kpi";
      params = q.to_json();
      params["kpi"] = json{{"class", kf.cls}, {"w", kf.w}, {"p", kf.p}};
      params["mode"] = kf.region ? "region" : (kf.sweep_d.empty() ? "optimize" : "sweep");
      if (!kf.sweep_d.empty()) params["sweep_d"] = kf.sweep_d;
      if (kf.region) params["resolution"] = kf.resolution;
      code = cmd_kpi(q, kf, os, err, tol);
    }
    os.flush();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<std::string> recorded{sub};
  recorded.insert(recorded.end(), args.begin() + 1, args.end());
  write_manifest(common, sub, recorded, params, tol, seconds, results);
  return code;
}

}  // namespace

std::vector<double> parse_sweep(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw Error(ErrorKind::OutOfRange, "cannot parse '" + text + "' as value or start:stop:step");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 2 && parts.size() != 3)
    throw Error(ErrorKind::OutOfRange, "cannot parse '" + text + "' as value or start:stop:step");
  const double start = parts[0], stop = parts[1];
  const double step = parts.size() == 3 ? parts[2] : 1.0;
  if (!(step > 0.0) || stop < start) throw Error(ErrorKind::OutOfRange, "sweep '" + text + "' is empty or has step <= 0");
  std::vector<double> values;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long i = 0; i <= count; ++i) values.push_back(start + step * static_cast<double>(i));
  return values;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return classify(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }
}

}  // namespace dapq
