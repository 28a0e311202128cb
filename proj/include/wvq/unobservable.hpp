#pragma once

// Unobservable queue: arrivals see nothing and join with probability q.

#include "wvq/core.hpp"

namespace wvq::unobservable {

/// Value substituted for q = 0 in sign tests of the net benefit.
inline constexpr double kZeroLimitQ = 1e-9;

struct UnobservableDerived {
  double r_p = 0.0;      ///< vacation ratio at effective rate pq
  double sigma = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double k_star = 0.0;
  double alpha_p = 0.0;  ///< busy traffic ratio at pq
};

/// q in (0, 1]. Throws Unstable if alpha_p >= 1 - kStabilityMargin and
/// DivisionHazard if r_p underflows.
UnobservableDerived derived_quantities(const QueueParams& params, double q);

double mean_sojourn(const QueueParams& params, double q);

/// R - C E[W(q)]; q = 0 is evaluated at kZeroLimitQ. Throws Unstable.
double net_benefit(const Model& m, double q);

struct EquilibriumReport {
  double value = 0.0;
  bool monotone = true;
  int sign_changes = 0;
};
EquilibriumReport equilibrium_report(const Model& m);
double equilibrium_join_probability(const Model& m);

/// pq (R - C E[W]); zero at q = 0. Throws Unstable.
double social_benefit(const Model& m, double q);

/// Grid (step 0.001) plus golden-section refinement; ties go to smaller q.
double socially_optimal_join_probability(const Model& m);

/// E[W] against P(J=0) E[W0] + P(J=1) E[W1] of the partially observable
/// queue with both join probabilities set to q.
struct Decomposition {
  double direct = 0.0;
  double by_phase = 0.0;
};
Decomposition decomposition_check(const QueueParams& params, double q);

}  // namespace wvq::unobservable
