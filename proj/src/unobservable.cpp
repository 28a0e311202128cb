#include "wvq/unobservable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wvq/partial.hpp"
#include "wvq/solve.hpp"

namespace wvq::unobservable {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

void require_join_probability(double q, bool allow_zero) {
  if (!(q <= 1.0) || !(allow_zero ? q >= 0.0 : q > 0.0))
    throw InvalidParameter("q", q);
}

}  // namespace

UnobservableDerived derived_quantities(const QueueParams& params, double q) {
  require_join_probability(q, false);
  const double pq = params.p * q;
  UnobservableDerived d;
  d.alpha_p = busy_traffic_ratio(pq, params.mu_b);
  if (d.alpha_p >= 1.0 - kStabilityMargin) throw Unstable("alpha_p", d.alpha_p);
  d.r_p = partial::vacation_rate_ratio(params, pq);
  if (d.r_p < 1e-14) throw DivisionHazard("r' vanishes at small pq");

  const double r = d.r_p, thb = complement(params.theta);
  const double spread = pq + r * (1.0 - pq);
  d.sigma = r / spread;
  d.delta1 = pq * pq * complement(params.mu_b) * thb * params.mu_v * (1.0 - r) * (1.0 - r) / r;
  d.delta2 = pq * thb * spread * (1.0 - r) / r * (params.mu_b - params.mu_v);
  d.k_star = 1.0 / (d.delta1 / pq + d.delta2 / pq * (1.0 - (1.0 - pq) * d.sigma));
  return d;
}

double mean_sojourn(const QueueParams& params, double q) {
  const UnobservableDerived d = derived_quantities(params, q);
  const double pq = params.p * q;
  return 1.0 / (params.mu_b * (1.0 - d.alpha_p)) +
         d.k_star * d.delta2 / pq * (1.0 - (1.0 - pq) * d.sigma) * d.sigma / (1.0 - d.sigma);
}

double net_benefit(const Model& m, double q) {
  require_join_probability(q, true);
  return m.econ.reward - m.econ.cost * mean_sojourn(m.queue, std::max(q, kZeroLimitQ));
}

EquilibriumReport equilibrium_report(const Model& m) {
  const auto root = solve::equilibrium_root([&](double q) {
    try {
      return net_benefit(m, q);
    } catch (const Unstable&) {
      return kMinusInf;
    }
  });
  return {std::clamp(root.value, 0.0, 1.0), root.monotone, root.sign_changes};
}

double equilibrium_join_probability(const Model& m) { return equilibrium_report(m).value; }

double social_benefit(const Model& m, double q) {
  require_join_probability(q, true);
  if (q == 0.0) return 0.0;
  return m.queue.p * q * (m.econ.reward - m.econ.cost * mean_sojourn(m.queue, q));
}

double socially_optimal_join_probability(const Model& m) {
  auto f = [&](double q) {
    try {
      return social_benefit(m, q);
    } catch (const Unstable&) {
      return kMinusInf;
    }
  };
  constexpr int kSteps = 1000;
  double best = solve::grid_argmax(f, 0.0, 1.0, kSteps);
  double best_value = f(best);
  const double lo = std::max(0.0, best - 1.0 / kSteps);
  const double hi = std::min(1.0, best + 1.0 / kSteps);
  const double gs = solve::golden_section_max(f, lo, hi, 1e-8);
  for (double c : {lo, gs, hi}) {
    const double v = f(c);
    if (v > best_value || (v == best_value && c < best)) {
      best_value = v;
      best = c;
    }
  }
  return best;
}

Decomposition decomposition_check(const QueueParams& params, double q) {
  const partial::MixedPair mixed{q, q};
  const auto dist = partial::stationary_distribution(params, mixed);
  const auto reg = partial::regime_probabilities(dist);
  return {mean_sojourn(params, q),
          reg.vacation * partial::mean_sojourn_vacation(params, mixed) +
              reg.busy * partial::mean_sojourn_busy(params, mixed)};
}

}  // namespace wvq::unobservable
