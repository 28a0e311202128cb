#pragma once

// Slot-by-slot Monte Carlo simulation of the queue under any strategy.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "wvq/chain.hpp"
#include "wvq/core.hpp"
#include "wvq/observable.hpp"
#include "wvq/partial.hpp"

namespace wvq::sim {

/// Unobservable strategy: join with probability q whatever the state.
struct Blind {
  double q = 0.0;
  bool operator==(const Blind&) const = default;
};

using Strategy = std::variant<observable::ThresholdPair, partial::MixedPair, Blind>;

/// Join probability of an arrival observing `s`.
double join_probability(const Strategy& strategy, SystemState s);
void validate(const Strategy& strategy);

struct SimConfig {
  std::uint64_t slots = 1'000'000;
  std::uint64_t warmup = 10'000;
  std::uint64_t seed = 1;
  /// Arrivals observing this state always join and are tagged.
  std::optional<SystemState> tagged_state;
  /// Negative control: the service draw sees the post-arrival count, so an
  /// arrival can finish in its own slot.
  bool corrupt_event_order = false;
  int batches = 100;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

struct SimResult {
  std::uint64_t recorded_slots = 0;
  std::map<SystemState, double> empirical_dist;
  std::map<SystemState, double> empirical_dist_se;  ///< batch-means standard errors

  Estimate mean_sojourn_overall;
  std::array<Estimate, 2> mean_sojourn_by_join_phase;  ///< indexed by index_of(phase)
  std::map<SystemState, Estimate> mean_sojourn_by_join_state;
  std::optional<Estimate> tagged;

  std::uint64_t potential_arrivals = 0;
  std::uint64_t balks = 0;
  double balk_rate = 0.0;
  Estimate balk;  ///< balk_rate with a batch-means standard error
  Estimate social_benefit_rate;
  Estimate mean_count;

  std::map<std::pair<SystemState, SystemState>, std::uint64_t> transition_counts;

  // Whole-run counters, warmup included.
  std::uint64_t total_joins = 0;
  std::uint64_t total_departures = 0;
  std::uint64_t in_system_at_end = 0;
  std::uint64_t min_sojourn = 0;  ///< over all departed customers
  bool phase_consistent = true;   ///< no recorded (0, Busy)
};

/// Throws InvalidParameter for invalid parameters, strategy or config.
/// Service rates of exactly 1 are accepted.
SimResult simulate(const Model& m, const Strategy& strategy, const SimConfig& config);

struct TransitionViolation {
  SystemState from;
  SystemState to;
  double empirical = 0.0;
  double expected = 0.0;
  double z = 0.0;
};

struct TransitionReport {
  int states_checked = 0;
  int cells_checked = 0;
  std::vector<TransitionViolation> violations;
};

/// Compares one-step frequencies out of every state visited at least
/// `min_visits` times with `matrix`; a cell fails beyond `z_limit` standard
/// errors, or if it was observed with zero expected probability.
TransitionReport transition_frequency_check(const SimResult& result,
                                            const TransitionMatrix& matrix,
                                            std::uint64_t min_visits = 1000,
                                            double z_limit = 5.0);

/// Mean sojourn of customers joining at config.tagged_state.
/// Throws InsufficientSamples below 100 tagged customers.
Estimate tagged_sojourn(const Model& m, const SimConfig& config, const Strategy& strategy);

}  // namespace wvq::sim
