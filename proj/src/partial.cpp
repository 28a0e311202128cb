#include "wvq/partial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "wvq/observable.hpp"
#include "wvq/solve.hpp"

namespace wvq::partial {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

void require_stable(double alpha_t) {
  if (alpha_t >= 1.0 - kStabilityMargin) throw Unstable("alpha_t", alpha_t);
}

// Mass at (0,0) divided by K.
double empty_weight(const PartialStationary& d) {
  return d.theta + complement(d.theta) * complement(d.p0) * d.mu_v * (1.0 - d.r);
}

}  // namespace

void validate(MixedPair q) {
  if (!(q.q0 >= 0.0 && q.q0 <= 1.0)) throw InvalidParameter("q0", q.q0);
  if (!(q.q1 >= 0.0 && q.q1 <= 1.0)) throw InvalidParameter("q1", q.q1);
}

Eigen::Matrix2d QbdRateMatrix::matrix() const {
  Eigen::Matrix2d m;
  m << r, r12, 0.0, alpha_t;
  return m;
}

QbdBlocks level_blocks(const QueueParams& q, MixedPair m) {
  const double p0 = q.p * m.q0, p1 = q.p * m.q1;
  const double th = q.theta, thb = complement(q.theta);
  const double stay_v = 1.0 - p0 * complement(q.mu_v) - complement(p0) * q.mu_v;
  const double stay_b = 1.0 - p1 * complement(q.mu_b) - complement(p1) * q.mu_b;
  QbdBlocks b;
  b.a1 << thb * stay_v, th * stay_v, 0.0, stay_b;
  b.c1 << p0 * thb * complement(q.mu_v), p0 * th * complement(q.mu_v), 0.0,
      p1 * complement(q.mu_b);
  b.b2 << complement(p0) * thb * q.mu_v, complement(p0) * th * q.mu_v, 0.0,
      complement(p1) * q.mu_b;
  return b;
}

double vacation_rate_ratio(const QueueParams& q, double p0) {
  const double beta = q.theta / complement(q.theta);
  const double mid = beta + p0 * complement(q.mu_v) + complement(p0) * q.mu_v;
  const double disc = mid * mid - 4.0 * p0 * q.mu_v * complement(p0) * complement(q.mu_v);
  // Smaller root through the product of roots; exact zero at p0 = 0.
  return 2.0 * p0 * complement(q.mu_v) / (mid + std::sqrt(std::max(disc, 0.0)));
}

QbdRateMatrix minimal_rate_matrix(const QueueParams& q, MixedPair m) {
  validate(m);
  const double p1 = q.p * m.q1;
  QbdRateMatrix out;
  out.r = vacation_rate_ratio(q, q.p * m.q0);
  out.alpha_t = busy_traffic_ratio(p1, q.mu_b);
  out.r12 = out.r * q.theta /
            (complement(q.theta) * complement(p1) * q.mu_b * (1.0 - out.r));
  return out;
}

double rate_matrix_residual(const QbdBlocks& blocks, const QbdRateMatrix& r) {
  const Eigen::Matrix2d m = r.matrix();
  return (m * m * blocks.b2 + m * blocks.a1 + blocks.c1 - m).cwiseAbs().maxCoeff();
}

double PartialStationary::prob(SystemState s) const {
  if (!is_valid(s)) return 0.0;
  if (s.count == 0) return k_const * empty_weight(*this);
  const int k = s.count;
  if (s.phase == ServerPhase::Vacation)
    return k_const * p0 * complement(theta) * (1.0 - r) * std::pow(r, k - 1);
  double sum = 0.0;
  for (int j = 0; j < k; ++j) sum += std::pow(r, j) * std::pow(alpha_t, k - 1 - j);
  return k_const * p0 * theta / (complement(p1) * mu_b) * sum;
}

double PartialStationary::total() const {
  return k_const * (empty_weight(*this) + p0 * complement(theta) +
                    p0 * theta / (complement(p1) * mu_b * (1.0 - r) * (1.0 - alpha_t)));
}

PartialStationary stationary_distribution(const QueueParams& q, MixedPair m) {
  const QbdRateMatrix rm = minimal_rate_matrix(q, m);
  require_stable(rm.alpha_t);
  PartialStationary d;
  d.r = rm.r;
  d.alpha_t = rm.alpha_t;
  d.p0 = q.p * m.q0;
  d.p1 = q.p * m.q1;
  d.theta = q.theta;
  d.mu_v = q.mu_v;
  d.mu_b = q.mu_b;
  const double g = complement(d.p1) * q.mu_b * (1.0 - d.r) * (1.0 - d.alpha_t);
  d.k_const = g / (g * (empty_weight(d) + d.p0 * complement(q.theta)) + d.p0 * q.theta);
  return d;
}

RegimeProbabilities regime_probabilities(const PartialStationary& d) {
  return {d.k_const * (d.theta / (1.0 - d.r) + complement(d.theta) * d.mu_v),
          d.k_const * d.p0 * d.theta /
              (complement(d.p1) * d.mu_b * (1.0 - d.alpha_t) * (1.0 - d.r))};
}

ConditionalMeans conditional_mean_queue_lengths(const PartialStationary& d) {
  const double denom = d.theta + complement(d.theta) * d.mu_v * (1.0 - d.r);
  if (!(denom > 0.0)) throw NumericalInstability("vacation-length denominator");
  return {d.p0 * complement(d.theta) / denom,
          (1.0 - d.r * d.alpha_t) / ((1.0 - d.alpha_t) * (1.0 - d.r))};
}

double mean_queue_length(const PartialStationary& d) {
  const double one_r = 1.0 - d.r, one_a = 1.0 - d.alpha_t;
  return d.k_const * d.p0 / one_r *
         (complement(d.theta) +
          d.theta * (1.0 - d.r * d.alpha_t) /
              (complement(d.p1) * d.mu_b * one_r * one_a * one_a));
}

double mean_sojourn_busy(const QueueParams& q, MixedPair m) {
  const QbdRateMatrix rm = minimal_rate_matrix(q, m);
  require_stable(rm.alpha_t);
  const double mb = q.mu_b;
  return 1.0 / (mb * (1.0 - rm.r)) + (mb * rm.alpha_t - mb + 1.0) / (mb * (1.0 - rm.alpha_t));
}

double sojourn_pgf_busy(const QueueParams& q, MixedPair m, double z) {
  const QbdRateMatrix rm = minimal_rate_matrix(q, m);
  require_stable(rm.alpha_t);
  const double mb = q.mu_b, mbb = complement(q.mu_b);
  return mb * mb * z * (1.0 - rm.alpha_t) * (1.0 - rm.r) /
         ((1.0 - mbb * z - mb * rm.alpha_t * z) * (1.0 - mbb * z - mb * rm.r * z));
}

double mean_sojourn_vacation(const QueueParams& q, MixedPair m) {
  validate(m);
  const double p0 = q.p * m.q0;
  const double r = vacation_rate_ratio(q, p0);
  const double th = q.theta, thb = complement(q.theta);
  const double one_r = 1.0 - r;
  const double a1 = q.mu_v * thb / (th + q.mu_v * thb);
  const double empty = th + thb * complement(p0) * q.mu_v * one_r;
  const double w = p0 * thb * one_r;
  // Sum over k >= 1 of r^(k-1) times the mean sojourn seen at (k, Vacation).
  const double tail = (1.0 / (one_r * one_r) + 1.0 / one_r) / q.mu_b - 1.0 / one_r +
                      (q.mu_b - q.mu_v) / (th * q.mu_b) *
                          (1.0 / one_r - a1 * a1 / (1.0 - r * a1));
  const double mass = th / one_r + thb * q.mu_v;
  return (empty * observable::mean_sojourn_vacation(0, q) + w * tail) / mass;
}

double sojourn_pgf_vacation(const QueueParams& q, MixedPair m, double z) {
  validate(m);
  const double p0 = q.p * m.q0;
  const double r = vacation_rate_ratio(q, p0);
  const double th = q.theta, thb = complement(q.theta);
  const double wz = 1.0 - complement(q.mu_v) * thb * z;
  const double a = q.mu_v * thb * z / wz;
  const double b = th / wz;
  const double g = q.mu_b * z / (1.0 - complement(q.mu_b) * z);
  const double one_ra = 1.0 - r * a, one_rg = 1.0 - r * g;

  const double empty = th + thb * complement(p0) * q.mu_v * (1.0 - r);
  const double w = p0 * thb * (1.0 - r);
  const double fewer = a / one_ra + b * g / (one_ra * one_rg);
  const double more = a * a / one_ra + b * g * (g * one_ra + a) / (one_ra * one_rg);
  const double mass = th / (1.0 - r) + thb * q.mu_v;
  return (empty * (a + b * g) + w * (q.mu_v * fewer + complement(q.mu_v) * more)) / mass;
}

double net_benefit_vacation(const QueueParams& q, const EconParams& e, double q0) {
  return e.reward - e.cost * mean_sojourn_vacation(q, {q0, 0.0});
}

double net_benefit_busy(const QueueParams& q, const EconParams& e, double q0,
                        double q1) {
  return e.reward - e.cost * mean_sojourn_busy(q, {q0, q1});
}

EquilibriumReport equilibrium_mixed_report(const Model& m) {
  EquilibriumReport out;
  const auto vac = solve::equilibrium_root(
      [&](double x) { return net_benefit_vacation(m.queue, m.econ, x); });
  const double q0 = clamp_unit(vac.value);
  const auto busy = solve::equilibrium_root([&](double x) {
    try {
      return net_benefit_busy(m.queue, m.econ, q0, x);
    } catch (const Unstable&) {
      return kMinusInf;
    }
  });
  out.value = {q0, clamp_unit(busy.value)};
  out.vacation_monotone = vac.monotone;
  out.busy_monotone = busy.monotone;
  return out;
}

MixedPair equilibrium_mixed(const Model& m) { return equilibrium_mixed_report(m).value; }

double social_benefit(const Model& m, MixedPair q) {
  const PartialStationary d = stationary_distribution(m.queue, q);
  const RegimeProbabilities reg = regime_probabilities(d);
  const double rate = m.queue.p * (reg.vacation * q.q0 + reg.busy * q.q1);
  return rate * m.econ.reward - m.econ.cost * mean_queue_length(d);
}

MixedPair socially_optimal_mixed(const Model& m) {
  auto f = [&](double q0, double q1) {
    try {
      return social_benefit(m, {q0, q1});
    } catch (const Unstable&) {
      return kMinusInf;
    }
  };

  constexpr int kSteps = 100;
  MixedPair best{0.0, 0.0};
  double best_value = kMinusInf;
  for (int i = 0; i <= kSteps; ++i) {
    for (int j = 0; j <= kSteps; ++j) {
      const double q0 = static_cast<double>(i) / kSteps;
      const double q1 = static_cast<double>(j) / kSteps;
      const double v = f(q0, q1);
      if (v > best_value) {
        best_value = v;
        best = {q0, q1};
      }
    }
  }

  // Coordinate-wise refinement inside one grid cell of the incumbent.
  auto refine = [&](auto&& g, double x, double& fx) {
    const double lo = std::max(0.0, x - 1.0 / kSteps);
    const double hi = std::min(1.0, x + 1.0 / kSteps);
    const double gs = solve::golden_section_max(g, lo, hi, 1e-7);
    for (double c : {lo, gs, hi}) {
      const double v = g(c);
      if (v > fx) {
        fx = v;
        x = c;
      }
    }
    return x;
  };
  for (int round = 0; round < 50; ++round) {
    const MixedPair old = best;
    best.q0 = refine([&](double x) { return f(x, best.q1); }, best.q0, best_value);
    best.q1 = refine([&](double y) { return f(best.q0, y); }, best.q1, best_value);
    if (std::abs(best.q0 - old.q0) < 1e-6 && std::abs(best.q1 - old.q1) < 1e-6) break;
  }
  return best;
}

int oracle_level(const QueueParams& q, MixedPair m) {
  const PartialStationary d = stationary_distribution(q, m);
  const double rho = std::max(d.r, d.alpha_t);
  int n = 1;
  if (rho > 0.0) {
    while (d.k_const * std::pow(rho, n) / (1.0 - rho) >= 1e-12) ++n;
  }
  return n + 20;
}

TransitionMatrix truncated_chain(const QueueParams& q, MixedPair m, int level) {
  validate(m);
  if (level < 1) throw InvalidParameter("level", level);
  TransitionMatrix out;
  out.states.push_back({0, ServerPhase::Vacation});
  for (int k = 1; k <= level; ++k) {
    out.states.push_back({k, ServerPhase::Vacation});
    out.states.push_back({k, ServerPhase::Busy});
  }
  const auto n = static_cast<Eigen::Index>(out.states.size());
  out.p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const SystemState s = out.states[static_cast<std::size_t>(i)];
    const double join = s.phase == ServerPhase::Busy ? m.q1 : m.q0;
    for_each_transition(s, q, join, [&](SystemState next, double prob) {
      next.count = std::min(next.count, level);
      out.p(i, out.index_of(next)) += prob;
    });
  }
  return out;
}

Eigen::VectorXd truncated_chain_oracle(const TransitionMatrix& chain) {
  Eigen::VectorXd pi = stationary_vector(chain.p);
  return pi / pi.sum();
}

}  // namespace wvq::partial
