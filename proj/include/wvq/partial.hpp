#pragma once

// Partially observable queue: arrivals see the server phase only and join
// with a phase-dependent probability.

#include <Eigen/Dense>

#include "wvq/chain.hpp"
#include "wvq/core.hpp"

namespace wvq::partial {

struct MixedPair {
  double q0 = 0.0;  ///< join probability in a vacation period
  double q1 = 0.0;  ///< join probability in a busy period

  bool operator==(const MixedPair&) const = default;
};

/// Throws InvalidParameter unless both components lie in [0, 1].
void validate(MixedPair q);

/// Upper-triangular rate matrix [[r, r12], [0, alpha_t]].
struct QbdRateMatrix {
  double r = 0.0;
  double r12 = 0.0;
  double alpha_t = 0.0;

  Eigen::Matrix2d matrix() const;
};

/// Level blocks of the chain above level 1.
struct QbdBlocks {
  Eigen::Matrix2d a1;  ///< same level
  Eigen::Matrix2d b2;  ///< one level down
  Eigen::Matrix2d c1;  ///< one level up
};

QbdBlocks level_blocks(const QueueParams& q, MixedPair m);

/// Smaller root of p0b mu_v r^2 - (beta + p0 mu_vb + p0b mu_v) r + p0 mu_vb = 0,
/// beta = theta / (1 - theta). Zero when p0 = 0.
double vacation_rate_ratio(const QueueParams& q, double p0);

QbdRateMatrix minimal_rate_matrix(const QueueParams& q, MixedPair m);

/// max-abs entry of R^2 B2 + R A1 + C1 - R.
double rate_matrix_residual(const QbdBlocks& blocks, const QbdRateMatrix& r);

struct PartialStationary {
  double k_const = 0.0;
  double r = 0.0;
  double alpha_t = 0.0;
  double p0 = 0.0;
  double p1 = 0.0;
  double theta = 0.0;
  double mu_v = 0.0;
  double mu_b = 0.0;

  double prob(SystemState s) const;
  /// Total mass from the geometric tail sums.
  double total() const;
};

/// Throws Unstable if alpha_t >= 1 - kStabilityMargin.
PartialStationary stationary_distribution(const QueueParams& q, MixedPair m);

struct RegimeProbabilities {
  double vacation = 0.0;
  double busy = 0.0;
};
RegimeProbabilities regime_probabilities(const PartialStationary& d);

struct ConditionalMeans {
  double vacation = 0.0;  ///< E[L | J = 0]
  double busy = 0.0;      ///< E[L | J = 1]
};
ConditionalMeans conditional_mean_queue_lengths(const PartialStationary& d);

double mean_queue_length(const PartialStationary& d);

// Sojourn of a customer who joins during a busy period / a vacation period.

double mean_sojourn_busy(const QueueParams& q, MixedPair m);
double sojourn_pgf_busy(const QueueParams& q, MixedPair m, double z);
/// Depends on q0 only.
double mean_sojourn_vacation(const QueueParams& q, MixedPair m);
double sojourn_pgf_vacation(const QueueParams& q, MixedPair m, double z);

double net_benefit_vacation(const QueueParams& q, const EconParams& e, double q0);
/// Throws Unstable when the busy queue is not stable at (q0, q1).
double net_benefit_busy(const QueueParams& q, const EconParams& e, double q0,
                        double q1);

/// Diagnostics of the most recent sequential solve.
struct EquilibriumReport {
  MixedPair value;
  bool vacation_monotone = true;
  bool busy_monotone = true;
};

EquilibriumReport equilibrium_mixed_report(const Model& m);
MixedPair equilibrium_mixed(const Model& m);

/// d R - C E[L] with d the effective joining rate. Throws Unstable.
double social_benefit(const Model& m, MixedPair q);

/// Grid (step 0.01) plus coordinate golden-section refinement. Unstable
/// pairs count as -inf.
MixedPair socially_optimal_mixed(const Model& m);

/// Smallest level meeting the tail bound K rho^N / (1 - rho) < 1e-12,
/// rho = max(r, alpha_t), plus a margin of 20 levels.
int oracle_level(const QueueParams& q, MixedPair m);

/// Chain truncated at `level`: transitions above it are folded back onto
/// the top level. States in lexicographic order.
TransitionMatrix truncated_chain(const QueueParams& q, MixedPair m, int level);
Eigen::VectorXd truncated_chain_oracle(const TransitionMatrix& chain);

}  // namespace wvq::partial
