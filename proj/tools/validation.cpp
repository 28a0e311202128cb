#include <cmath>

#include "cli.hpp"
#include "wvq/observable.hpp"
#include "wvq/partial.hpp"
#include "wvq/unobservable.hpp"

namespace wvq::cli {

namespace {

constexpr double kMinExpectedVisits = 100.0;
constexpr std::uint64_t kMinSojournSamples = 1000;

std::string state_label(SystemState s) {
  return "pi(" + std::to_string(s.count) + "," + std::to_string(index_of(s.phase)) + ")";
}

class Builder {
 public:
  void compare(const std::string& metric, double analytic, const sim::Estimate& e) {
    compare(metric, analytic, e.value, e.std_error);
  }

  void compare(const std::string& metric, double analytic, double empirical, double se) {
    ValidationRow row{metric, analytic, empirical, se, 0.0, true};
    const double diff = empirical - analytic;
    if (se > 0.0 && std::isfinite(se))
      row.z = diff / se;
    else
      row.z = std::abs(diff) < 1e-12 ? 0.0 : std::copysign(INFINITY, diff);
    row.pass = std::abs(row.z) <= kValidationBand;
    push(row);
  }

  // Exact check without a standard error.
  void require(const std::string& metric, double expected, double observed, bool ok) {
    push({metric, expected, observed, 0.0, ok ? 0.0 : INFINITY, ok});
  }

  ValidationReport done() { return std::move(report_); }

 private:
  void push(const ValidationRow& row) {
    report_.pass = report_.pass && row.pass;
    report_.rows.push_back(row);
  }
  ValidationReport report_;
};

// Per-state probabilities, the support, and run-level invariants.
void compare_distribution(Builder& b, const sim::SimResult& r,
                          const std::function<double(SystemState)>& analytic,
                          const std::vector<SystemState>& states) {
  const double slots = static_cast<double>(r.recorded_slots);
  for (SystemState s : states) {
    const double a = analytic(s);
    if (a * slots < kMinExpectedVisits) continue;
    const auto it = r.empirical_dist.find(s);
    const double e = it == r.empirical_dist.end() ? 0.0 : it->second;
    const double se = it == r.empirical_dist.end() ? 0.0 : r.empirical_dist_se.at(s);
    b.compare(state_label(s), a, e, se);
  }
  int outside = 0;
  for (const auto& [s, v] : r.empirical_dist)
    if (analytic(s) == 0.0) ++outside;
  b.require("states_outside_support", 0, outside, outside == 0);
}

void compare_run(Builder& b, const sim::SimResult& r, const TransitionMatrix& chain) {
  const auto report = sim::transition_frequency_check(r, chain);
  b.require("transition_violations", 0, double(report.violations.size()),
            report.violations.empty());
  b.require("min_sojourn", 1, double(r.min_sojourn), r.min_sojourn >= 1);
  const double leak = double(r.total_joins) - double(r.total_departures) -
                      double(r.in_system_at_end);
  b.require("conservation", 0, leak, leak == 0.0);
  b.require("phase_consistent", 1, r.phase_consistent ? 1 : 0, r.phase_consistent);
}

int max_count(const sim::SimResult& r) {
  int n = 0;
  for (const auto& [s, v] : r.empirical_dist) n = std::max(n, s.count);
  return n;
}

ValidationReport validate_observable(const Model& m, const sim::SimConfig& cfg,
                                     std::optional<sim::Strategy> strategy) {
  const auto t = strategy ? std::get<observable::ThresholdPair>(*strategy)
                          : observable::equilibrium_thresholds(m);
  const auto dist = observable::stationary_distribution(m.queue, t);
  const auto r = sim::simulate(m, t, cfg);

  Builder b;
  std::vector<SystemState> states;
  for (const auto& [s, v] : dist.probabilities) states.push_back(s);
  compare_distribution(b, r, [&](SystemState s) { return dist.prob(s); }, states);
  b.compare("mean_count", dist.mean_count(), r.mean_count);
  b.compare("balk_probability", observable::balking_probability(dist, t), r.balk);
  b.compare("social_benefit", observable::social_benefit(m, dist, t), r.social_benefit_rate);
  for (const auto& [s, e] : r.mean_sojourn_by_join_state) {
    if (e.samples < kMinSojournSamples) continue;
    b.compare("sojourn(" + std::to_string(s.count) + "," + std::to_string(index_of(s.phase)) + ")",
              observable::mean_sojourn(s.phase, s.count, m.queue), e);
  }
  compare_run(b, r, observable::transition_matrix(m.queue, t));
  return b.done();
}

void validate_mixed(Builder& b, const Model& m, partial::MixedPair q, const sim::SimResult& r) {
  const auto dist = partial::stationary_distribution(m.queue, q);
  const auto reg = partial::regime_probabilities(dist);
  const int top = std::max(partial::oracle_level(m.queue, q), max_count(r) + 1);

  std::vector<SystemState> states{{0, ServerPhase::Vacation}};
  for (int k = 1; k <= top; ++k) {
    states.push_back({k, ServerPhase::Vacation});
    states.push_back({k, ServerPhase::Busy});
  }
  compare_distribution(b, r, [&](SystemState s) { return dist.prob(s); }, states);
  b.compare("mean_count", partial::mean_queue_length(dist), r.mean_count);
  b.compare("balk_probability", 1.0 - (reg.vacation * q.q0 + reg.busy * q.q1), r.balk);
  b.compare("social_benefit", partial::social_benefit(m, q), r.social_benefit_rate);
  const auto& by_phase = r.mean_sojourn_by_join_phase;
  if (by_phase[0].samples >= kMinSojournSamples)
    b.compare("sojourn_vacation", partial::mean_sojourn_vacation(m.queue, q), by_phase[0]);
  if (by_phase[1].samples >= kMinSojournSamples)
    b.compare("sojourn_busy", partial::mean_sojourn_busy(m.queue, q), by_phase[1]);
  compare_run(b, r, partial::truncated_chain(m.queue, q, max_count(r) + 1));
}

ValidationReport validate_partial(const Model& m, const sim::SimConfig& cfg,
                                  std::optional<sim::Strategy> strategy) {
  const auto q = strategy ? std::get<partial::MixedPair>(*strategy) : partial::equilibrium_mixed(m);
  const auto r = sim::simulate(m, q, cfg);
  Builder b;
  validate_mixed(b, m, q, r);
  return b.done();
}

ValidationReport validate_unobservable(const Model& m, const sim::SimConfig& cfg,
                                       std::optional<sim::Strategy> strategy) {
  const double q = strategy ? std::get<sim::Blind>(*strategy).q
                            : unobservable::equilibrium_join_probability(m);
  const auto r = sim::simulate(m, sim::Blind{q}, cfg);
  Builder b;
  if (q > 0.0 && r.mean_sojourn_overall.samples >= kMinSojournSamples)
    b.compare("sojourn_overall", unobservable::mean_sojourn(m.queue, q), r.mean_sojourn_overall);
  b.compare("social_benefit_blind", unobservable::social_benefit(m, q), r.social_benefit_rate);
  validate_mixed(b, m, {q, q}, r);
  return b.done();
}

}  // namespace

std::string ValidationReport::csv() const {
  std::string out = "metric,analytic,empirical,stderr,z\n";
  for (const auto& r : rows)
    out += r.metric + "," + format_number(r.analytic) + "," + format_number(r.empirical) + "," +
           format_number(r.std_error) + "," + format_number(r.z) + "\n";
  return out;
}

Model default_validation_model(Case c) {
  switch (c) {
    case Case::Observable:
      return {{0.5, 0.8, 0.4, 0.2}, {10.0, 1.0}};
    case Case::Partial:
      return {{0.5, 0.9, 0.5, 0.05}, {10.0, 3.0}};
    case Case::Unobservable:
      return {{0.5, 0.9, 0.5, 0.3}, {4.5, 1.0}};
  }
  throw std::invalid_argument("unknown case");
}

std::optional<Case> parse_case(const std::string& name) {
  if (name == "observable") return Case::Observable;
  if (name == "partial") return Case::Partial;
  if (name == "unobservable") return Case::Unobservable;
  return std::nullopt;
}

ValidationReport validate_case(Case c, const Model& m, const sim::SimConfig& config,
                               std::optional<sim::Strategy> strategy) {
  if (config.slots < kMinValidationSlots)
    throw InsufficientSamples("validation needs at least " +
                              std::to_string(kMinValidationSlots) + " slots");
  switch (c) {
    case Case::Observable:
      return validate_observable(m, config, strategy);
    case Case::Partial:
      return validate_partial(m, config, strategy);
    case Case::Unobservable:
      return validate_unobservable(m, config, strategy);
  }
  throw std::invalid_argument("unknown case");
}

}  // namespace wvq::cli
