#include "wvq/core.hpp"

#include <cmath>
#include <sstream>

namespace wvq {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::Unstable: return "Unstable";
    case ErrorKind::DegenerateRoots: return "DegenerateRoots";
    case ErrorKind::UnsupportedThresholdShape: return "UnsupportedThresholdShape";
    case ErrorKind::NumericalInstability: return "NumericalInstability";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::DivisionHazard: return "DivisionHazard";
  }
  return "Unknown";
}

namespace {

std::string format_invalid(const std::string& field, double value) {
  std::ostringstream os;
  os.precision(17);
  os << "InvalidParameter: " << field << " = " << value;
  return os.str();
}

std::string format_unstable(const std::string& name, double ratio) {
  std::ostringstream os;
  os.precision(17);
  os << "Unstable: " << name << " = " << ratio << " (must be < 1)";
  return os.str();
}

void require_open_unit(const char* field, double x) {
  if (!(x > 0.0 && x < 1.0)) throw InvalidParameter(field, x);
}

void require_positive(const char* field, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InvalidParameter(field, x);
}

}  // namespace

InvalidParameter::InvalidParameter(std::string field, double value)
    : Error(ErrorKind::InvalidParameter, format_invalid(field, value)),
      field_(std::move(field)),
      value_(value) {}

Unstable::Unstable(std::string ratio_name, double ratio)
    : Error(ErrorKind::Unstable, format_unstable(ratio_name, ratio)),
      ratio_name_(std::move(ratio_name)),
      ratio_(ratio) {}

const char* to_string(ServerPhase phase) noexcept {
  return phase == ServerPhase::Busy ? "Busy" : "Vacation";
}

bool is_valid(SystemState s) noexcept {
  if (s.count < 0) return false;
  return s.count > 0 || s.phase == ServerPhase::Vacation;
}

std::string to_string(SystemState s) {
  return "(" + std::to_string(s.count) + "," +
         std::to_string(index_of(s.phase)) + ")";
}

QueueParams validate(const QueueParams& params) {
  require_open_unit("p", params.p);
  require_open_unit("mu_b", params.mu_b);
  require_open_unit("mu_v", params.mu_v);
  require_open_unit("theta", params.theta);
  return params;
}

EconParams validate(const EconParams& econ) {
  require_positive("reward", econ.reward);
  require_positive("cost", econ.cost);
  return econ;
}

Model validate(const QueueParams& params, const EconParams& econ) {
  return Model{validate(params), validate(econ)};
}

double busy_traffic_ratio(double p_eff, double mu) {
  return p_eff * complement(mu) / (complement(p_eff) * mu);
}

}  // namespace wvq
