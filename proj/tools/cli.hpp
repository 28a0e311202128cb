#pragma once

// Command-line front end: analysis reports, figure sweeps, and
// analytic-versus-simulation validation.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wvq/core.hpp"
#include "wvq/simulator.hpp"

namespace wvq::cli {

enum ExitCode : int { kOk = 0, kValidationFailed = 1, kBadInput = 2, kUnstable = 3 };

/// Full command line including the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "%.12g"; infinities as inf / -inf.
std::string format_number(double x);

/// Optional replacements for a figure's fixed parameter values.
struct Overrides {
  std::optional<double> p, mu_b, mu_v, theta, reward, cost;
};

enum class Case { Observable, Partial, Unobservable };
std::optional<Case> parse_case(const std::string& name);

const std::vector<std::string>& figure_ids();
/// CSV for one figure; throws std::invalid_argument for unknown ids.
std::string figure_csv(const std::string& id, const Overrides& overrides = {}, int jobs = 1);

/// Caption parameters at which the validation of each case runs by default.
Model default_validation_model(Case c);

struct ValidationRow {
  std::string metric;
  double analytic = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  bool pass = true;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  bool pass = true;
  std::string csv() const;
};

/// Band for every statistical comparison, in standard errors.
inline constexpr double kValidationBand = 4.0;
/// Shortest run accepted by validate.
inline constexpr std::uint64_t kMinValidationSlots = 10'000;

/// Simulates the equilibrium strategy of case `c` (or `strategy` when given)
/// and compares it with the analytic module. Throws InsufficientSamples for
/// runs shorter than kMinValidationSlots.
ValidationReport validate_case(Case c, const Model& m, const sim::SimConfig& config,
                               std::optional<sim::Strategy> strategy = {});

/// Evaluates f at every point, concurrently when jobs > 1, in input order.
std::vector<std::string> map_points(std::size_t count,
                                    const std::function<std::string(std::size_t)>& f,
                                    int jobs);

}  // namespace wvq::cli
