#include "dapq/core.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace dapq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnstableSystem: return "UnstableSystem";
    case ErrorKind::InvalidDelay: return "InvalidDelay";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NoClass1: return "NoClass1";
    case ErrorKind::NumericalInstability: return "NumericalInstability";
    case ErrorKind::RootBracketFailure: return "RootBracketFailure";
    case ErrorKind::TruncationOverflow: return "TruncationOverflow";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::AccuracyNotMet: return "AccuracyNotMet";
    case ErrorKind::DegenerateMean: return "DegenerateMean";
    case ErrorKind::EmptyOverlap: return "EmptyOverlap";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::NonMonotone: return "NonMonotone";
  }
  return "Unknown";
}

bool Error::is_numerical() const noexcept {
  switch (kind_) {
    case ErrorKind::NumericalInstability:
    case ErrorKind::RootBracketFailure:
    case ErrorKind::TruncationOverflow:
    case ErrorKind::NonConvergence:
    case ErrorKind::AccuracyNotMet:
    case ErrorKind::NonMonotone:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(ServiceKind kind) {
  return kind == ServiceKind::Exponential ? "exp" : "det";
}

ServiceKind parse_service_kind(std::string_view text) {
  if (text == "exp" || text == "exponential" || text == "M") return ServiceKind::Exponential;
  if (text == "det" || text == "deterministic" || text == "D") return ServiceKind::Deterministic;
  throw Error(ErrorKind::OutOfRange, "unknown service kind '" + std::string(text) + "'");
}

double QueueConfig::service_second_moment() const {
  return service == ServiceKind::Exponential ? 2.0 / (mu * mu) : 1.0 / (mu * mu);
}

void Kpi::validate() const {
  if (!(target_w > 0.0)) throw Error(ErrorKind::OutOfRange, "KPI target must be positive");
  if (!(compliance_p > 0.0 && compliance_p < 1.0))
    throw Error(ErrorKind::OutOfRange, "KPI compliance probability must lie in (0,1)");
  if (class_index != 1 && class_index != 2)
    throw Error(ErrorKind::OutOfRange, "KPI class must be 1 or 2");
}

void ToleranceConfig::validate() const {
  if (!(eps_series > 0.0) || !(eps_root > 0.0) || !(eps_invert > 0.0))
    throw Error(ErrorKind::OutOfRange, "tolerances must be positive");
  if (max_states < 1) throw Error(ErrorKind::OutOfRange, "max_states must be at least 1");
}

namespace {

bool env_double(const char* name, double& out) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return false;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0')
    throw Error(ErrorKind::OutOfRange, std::string("cannot parse ") + name + "='" + raw + "'");
  out = v;
  return true;
}

}  // namespace

ToleranceConfig ToleranceConfig::from_env() {
  ToleranceConfig tol;
  env_double("DAPQ_EPS_SERIES", tol.eps_series);
  env_double("DAPQ_EPS_ROOT", tol.eps_root);
  env_double("DAPQ_EPS_INVERT", tol.eps_invert);
  double states = 0.0;
  if (env_double("DAPQ_MAX_STATES", states)) tol.max_states = static_cast<std::size_t>(states);
  tol.validate();
  return tol;
}

bool delay_is_service_multiple(double d, double mu, long* multiple) {
  const double units = d * mu;
  const double rounded = std::round(units);
  const bool ok = std::abs(units - rounded) <= 1e-9 * std::max(1.0, units);
  if (ok && multiple != nullptr) *multiple = static_cast<long>(rounded);
  return ok;
}

DerivedRates validate(const QueueConfig& c) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(c.lambda1) || !finite(c.lambda2) || !finite(c.mu) || !finite(c.b) || !finite(c.d))
    throw Error(ErrorKind::OutOfRange, "parameters must be finite");
  if (c.lambda1 < 0.0 || c.lambda2 < 0.0)
    throw Error(ErrorKind::OutOfRange, "arrival rates must be nonnegative");
  if (!(c.mu > 0.0)) throw Error(ErrorKind::OutOfRange, "service rate mu must be positive");
  if (c.b < 0.0 || c.b > 1.0) throw Error(ErrorKind::OutOfRange, "accumulation rate b must lie in [0,1]");
  if (c.d < 0.0) throw Error(ErrorKind::OutOfRange, "delay d must be nonnegative");

  const double rho = c.rho();
  if (rho >= 1.0) {
    std::ostringstream msg;
    msg << "rho = " << rho << " >= 1";
    throw Error(ErrorKind::UnstableSystem, msg.str());
  }
  if (c.service == ServiceKind::Deterministic && c.d > 0.0 && !delay_is_service_multiple(c.d, c.mu)) {
    std::ostringstream msg;
    msg << "deterministic service needs d to be a whole multiple of 1/mu (d = " << c.d
        << ", 1/mu = " << 1.0 / c.mu << ")";
    throw Error(ErrorKind::InvalidDelay, msg.str());
  }

  DerivedRates r;
  r.rho1 = c.lambda1 / c.mu;
  r.rho2 = c.lambda2 / c.mu;
  r.rho = rho;
  r.lambda1_acc = c.lambda1 * (1.0 - c.b);
  r.rho1_acc = r.lambda1_acc / c.mu;
  r.nu = c.mu + c.lambda1;
  r.p_up = c.lambda1 / r.nu;
  r.q_down = c.mu / r.nu;
  r.r_coef = r.p_up + r.q_down * rho * rho;
  return r;
}

double conservation_rhs(const QueueConfig& config) {
  validate(config);
  const double rho = config.rho();
  const double lambda = config.lambda1 + config.lambda2;
  return rho / (1.0 - rho) * lambda * config.service_second_moment() / 2.0;
}

double class1_mean_from_class2(const QueueConfig& config, double mean_w2) {
  const DerivedRates r = validate(config);
  if (r.rho1 <= 0.0) throw Error(ErrorKind::NoClass1, "class-1 arrival rate is zero");
  return (conservation_rhs(config) - r.rho2 * mean_w2) / r.rho1;
}

double conservation_residual(const QueueConfig& config, double mean_w1, double mean_w2) {
  const DerivedRates r = validate(config);
  return std::abs(r.rho1 * mean_w1 + r.rho2 * mean_w2 - conservation_rhs(config));
}

std::vector<double> make_grid(const QueueConfig& config, const GridSpec& spec) {
  const double step = spec.step > 0.0 ? spec.step : 0.05 / config.mu;
  double t_max = spec.t_max;
  if (!(t_max > 0.0)) {
    const double rho = config.rho();
    t_max = 10.0 / config.mu;
    if (rho > 1e-6 && rho < 1.0) t_max = std::max(t_max, std::log(rho / 1e-6) / (config.mu * (1.0 - rho)));
  }
  const auto n = static_cast<std::size_t>(std::ceil(t_max / step - 1e-9));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) * step;
  return grid;
}

}  // namespace dapq
