#pragma once

// Fully observable queue: arriving customers see both the queue length and
// the server phase and follow a phase-dependent threshold rule.

#include <map>
#include <optional>

#include "wvq/chain.hpp"
#include "wvq/core.hpp"

namespace wvq::observable {

/// Join iff the observed count is at most the threshold of the observed
/// phase. -1 means never join in that phase.
struct ThresholdPair {
  int n0 = -1;  ///< vacation phase
  int n1 = -1;  ///< busy phase

  int threshold(ServerPhase phase) const noexcept {
    return phase == ServerPhase::Busy ? n1 : n0;
  }
  bool joins(SystemState s) const noexcept { return s.count <= threshold(s.phase); }

  auto operator<=>(const ThresholdPair&) const = default;
  bool operator==(const ThresholdPair&) const = default;
};

/// Roots of the characteristic equation of the vacation-level recursion,
/// x1 > 1 > x2 > 0.
struct CharacteristicRoots {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Coefficients of the closed-form stationary distribution before
/// normalization; `pi11` is the normalized anchor probability.
struct ObservableCoefficients {
  double a1t = 0.0, b1t = 0.0;  // vacation levels: a1t x1^n + b1t x2^n
  double c1t = 0.0, d1t = 0.0;  // particular solution on busy levels
  double a2t = 0.0, b2t = 0.0;  // homogeneous part on busy levels 1..n0
  double b3t = 0.0;             // busy levels n0+2..n1: b3t alpha^n
  double pi11 = 0.0;
  double h = 0.0;
};

enum class SolveMethod { ClosedForm, LinearSolve };

struct ObservableStationary {
  std::map<SystemState, double> probabilities;
  SolveMethod method = SolveMethod::LinearSolve;

  double prob(SystemState s) const;
  double total() const;
  double mean_count() const;
};

// Sojourn of a customer who joins after observing (n, phase).

double sojourn_pgf_busy(int n, const QueueParams& q, double z);
double mean_sojourn_busy(int n, const QueueParams& q);

/// Simplified closed form; falls back to sojourn_pgf_vacation_sum when the
/// common denominator of the simplified form vanishes.
double sojourn_pgf_vacation(int n, const QueueParams& q, double z);
/// The same PGF as a finite sum over the number of vacation-rate
/// completions before the vacation ends.
double sojourn_pgf_vacation_sum(int n, const QueueParams& q, double z);
double mean_sojourn_vacation(int n, const QueueParams& q);

double mean_sojourn(ServerPhase phase, int n, const QueueParams& q);
double net_benefit(ServerPhase phase, int n, const Model& m);

/// Largest n per phase with nonnegative net benefit (integer scan for the
/// vacation phase, closed-form floor for the busy phase).
ThresholdPair equilibrium_thresholds(const Model& m);
/// Same thresholds via the continuous root of U = 0 followed by floor.
ThresholdPair equilibrium_thresholds_continuous(const Model& m);

CharacteristicRoots characteristic_roots(const QueueParams& q);

/// Throws UnsupportedThresholdShape unless n0 >= 1 and n1 >= n0 + 2.
ObservableCoefficients closed_form_coefficients(const QueueParams& q,
                                                ThresholdPair t);
ObservableStationary closed_form_distribution(const QueueParams& q,
                                              ThresholdPair t);

/// Chain over the states reachable under `t`, in lexicographic order.
TransitionMatrix transition_matrix(const QueueParams& q, ThresholdPair t);
ObservableStationary linear_solve_distribution(const TransitionMatrix& m);

/// Closed form when it applies, otherwise the linear solve.
ObservableStationary stationary_distribution(const QueueParams& q,
                                             ThresholdPair t);

/// Long-run probability that a potential arrival balks.
double balking_probability(const ObservableStationary& dist, ThresholdPair t);

double social_benefit(const Model& m, ThresholdPair t);
double social_benefit(const Model& m, const ObservableStationary& dist,
                      ThresholdPair t);

/// Argmax of social_benefit over [-1, cap.n0] x [-1, cap.n1]; ties go to the
/// lexicographically smallest pair. Default cap: equilibrium + 5.
ThresholdPair socially_optimal_thresholds(const Model& m,
                                          std::optional<ThresholdPair> cap = {});

}  // namespace wvq::observable
