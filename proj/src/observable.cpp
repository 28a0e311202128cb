#include "wvq/observable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wvq/solve.hpp"

namespace wvq::observable {

namespace {

constexpr double kDenominatorFloor = 1e-13;

void require_count(int n, int min) {
  if (n < min) throw InvalidParameter("n", n);
}

// Per-slot vacation factors of the sojourn PGF at z.
struct VacationFactors {
  double a;  // one vacation-rate completion, vacation continues
  double b;  // vacation ends before the next completion
  double g;  // one regular-rate service
};

VacationFactors vacation_factors(const QueueParams& q, double z) {
  const double thb = complement(q.theta);
  const double w = 1.0 - complement(q.mu_v) * thb * z;
  return {q.mu_v * thb * z / w, q.theta / w,
          q.mu_b * z / (1.0 - complement(q.mu_b) * z)};
}

// P(no vacation completion, vacation continues) ratio at z = 1.
double vacation_continue_ratio(const QueueParams& q) {
  const double thb = complement(q.theta);
  return q.mu_v * thb / (q.theta + q.mu_v * thb);
}

// Mean sojourn of a customer joining an empty system in vacation.
double empty_vacation_sojourn(const QueueParams& q) {
  return (q.theta + q.mu_b - q.theta * q.mu_b) /
         (q.mu_b * (q.theta + q.mu_v - q.theta * q.mu_v));
}

// Vacation-phase mean for real n >= 1 (the n >= 1 branch, continued).
double vacation_sojourn_continuous(double n, const QueueParams& q) {
  return (n + 1.0) / q.mu_b - 1.0 +
         (q.mu_b - q.mu_v) / (q.theta * q.mu_b) *
             (1.0 - std::pow(vacation_continue_ratio(q), n + 1.0));
}

double busy_sojourn_any(int n, const QueueParams& q) {
  return (n + 1.0) / q.mu_b - 1.0;
}

void check_denominator(double d, const char* what) {
  if (!(std::abs(d) >= kDenominatorFloor))
    throw NumericalInstability(std::string("vanishing denominator in ") + what);
}

}  // namespace

double ObservableStationary::prob(SystemState s) const {
  auto it = probabilities.find(s);
  return it == probabilities.end() ? 0.0 : it->second;
}

double ObservableStationary::total() const {
  double sum = 0.0;
  for (const auto& [s, v] : probabilities) sum += v;
  return sum;
}

double ObservableStationary::mean_count() const {
  double sum = 0.0;
  for (const auto& [s, v] : probabilities) sum += s.count * v;
  return sum;
}

double sojourn_pgf_busy(int n, const QueueParams& q, double z) {
  require_count(n, 1);
  const double denom = 1.0 - complement(q.mu_b) * z;
  return q.mu_b / denom * std::pow(q.mu_b * z / denom, n);
}

double mean_sojourn_busy(int n, const QueueParams& q) {
  require_count(n, 1);
  return busy_sojourn_any(n, q);
}

double sojourn_pgf_vacation_sum(int n, const QueueParams& q, double z) {
  require_count(n, 0);
  const auto [a, b, g] = vacation_factors(q, z);
  // m services needed: j < m finish at the vacation rate, the rest at mu_b.
  auto block = [&](int m) {
    double s = std::pow(a, m);
    for (int j = 0; j < m; ++j) s += b * std::pow(a, j) * std::pow(g, m - j);
    return s;
  };
  if (n == 0) return block(1);
  return q.mu_v * block(n) + complement(q.mu_v) * block(n + 1);
}

double sojourn_pgf_vacation(int n, const QueueParams& q, double z) {
  require_count(n, 0);
  const auto [a, b, g] = vacation_factors(q, z);
  if (n == 0) return a + b * g;

  const double thb = complement(q.theta);
  const double w = 1.0 - complement(q.mu_v) * thb * z;
  const double d = q.mu_b * w - q.mu_v * thb * (1.0 - complement(q.mu_b) * z);
  if (std::abs(d) < 1e-14) return sojourn_pgf_vacation_sum(n, q, z);
  const double k = q.theta * q.mu_b / d;
  return q.mu_v / w * std::pow(a, n) * (1.0 - k) +
         k * std::pow(g, n) * (q.mu_v + complement(q.mu_v) * g);
}

double mean_sojourn_vacation(int n, const QueueParams& q) {
  require_count(n, 0);
  if (n == 0) return empty_vacation_sojourn(q);
  return vacation_sojourn_continuous(n, q);
}

double mean_sojourn(ServerPhase phase, int n, const QueueParams& q) {
  return phase == ServerPhase::Busy ? mean_sojourn_busy(n, q)
                                    : mean_sojourn_vacation(n, q);
}

double net_benefit(ServerPhase phase, int n, const Model& m) {
  return m.econ.reward - m.econ.cost * mean_sojourn(phase, n, m.queue);
}

namespace {

int busy_threshold(const Model& m) {
  const double exact = m.queue.mu_b * (m.econ.reward / m.econ.cost + 1.0) - 1.0;
  if (exact < 0.0) return -1;
  int k = static_cast<int>(std::floor(exact));
  auto ok = [&](int n) {
    return m.econ.reward - m.econ.cost * busy_sojourn_any(n, m.queue) >= 0.0;
  };
  // Guard the floor against rounding at exact integer roots.
  if (ok(k + 1)) ++k;
  while (k >= 0 && !ok(k)) --k;
  return std::max(k, -1);
}

}  // namespace

ThresholdPair equilibrium_thresholds(const Model& m) {
  ThresholdPair t;
  t.n1 = busy_threshold(m);

  int n = -1;
  double prev = -std::numeric_limits<double>::infinity();
  while (true) {
    const double w = mean_sojourn_vacation(n + 1, m.queue);
    if (!(w > prev))
      throw NumericalInstability("vacation sojourn not increasing in n");
    prev = w;
    if (m.econ.reward - m.econ.cost * w < 0.0) break;
    ++n;
  }
  t.n0 = n;
  return t;
}

ThresholdPair equilibrium_thresholds_continuous(const Model& m) {
  ThresholdPair t;
  const double busy_root =
      m.queue.mu_b * (m.econ.reward / m.econ.cost + 1.0) - 1.0;
  t.n1 = busy_root < 0.0 ? -1 : static_cast<int>(std::floor(busy_root));

  const double r = m.econ.reward, c = m.econ.cost;
  if (r - c * empty_vacation_sojourn(m.queue) < 0.0) {
    t.n0 = -1;
    return t;
  }
  auto u = [&](double x) { return r - c * vacation_sojourn_continuous(x, m.queue); };
  if (u(1.0) < 0.0) {
    t.n0 = 0;
    return t;
  }
  double lo = 1.0, hi = 2.0;
  while (u(hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  const double root = solve::bisect_decreasing(u, lo, hi, 1e-12 * hi);
  t.n0 = static_cast<int>(std::floor(root));
  return t;
}

CharacteristicRoots characteristic_roots(const QueueParams& q) {
  const double thb = complement(q.theta);
  const double pb = complement(q.p);
  const double lead = thb * pb * q.mu_v;
  const double constant = thb * q.p * complement(q.mu_v);
  const double middle = q.theta + constant + lead;
  const double disc = middle * middle - 4.0 * lead * constant;
  const double x1 = (middle + std::sqrt(std::max(disc, 0.0))) / (2.0 * lead);
  const double x2 = q.p * complement(q.mu_v) / (pb * q.mu_v) / x1;
  if (std::abs(x1 - x2) < 1e-9) throw DegenerateRoots("x1 == x2");
  return {x1, x2};
}

ObservableCoefficients closed_form_coefficients(const QueueParams& q,
                                                ThresholdPair t) {
  if (t.n0 < 1 || t.n1 < t.n0 + 2)
    throw UnsupportedThresholdShape("closed form needs n0 >= 1 and n1 >= n0 + 2");
  const double alpha = busy_traffic_ratio(q.p, q.mu_b);
  if (alpha >= 1.0 - kStabilityMargin) throw Unstable("alpha", alpha);

  const auto [x1, x2] = characteristic_roots(q);
  const double p = q.p, pb = complement(q.p);
  const double mb = q.mu_b, mbb = complement(q.mu_b);
  const double mv = q.mu_v, mvb = complement(q.mu_v);
  const double th = q.theta, thb = complement(q.theta);
  const int n0 = t.n0, n1 = t.n1;

  const double s = th + thb * p * mvb + thb * pb * mv;
  // Boundary equation at level n0 after eliminating level n0 + 1.
  const double e = s - th * thb * mvb - thb * thb * mvb * mvb * p - thb * thb * mvb * mv;
  const double f = p * thb * mvb * (1.0 - thb * mvb);
  auto g = [&](double x) { return th * x + thb * p * mvb * x - thb * pb * mv * x * x; };
  auto edge = [&](double x) { return e * std::pow(x, n0) - f * std::pow(x, n0 - 1); };

  const double h_inv = g(x2) * edge(x1) - g(x1) * edge(x2);
  check_denominator(h_inv, "H");
  const double h = 1.0 / h_inv;

  // Everything below is linear in pi11; solve with pi11 = 1, then normalize.
  const double scale = pb * thb * mb;
  double a1 = h * scale * (f * std::pow(x2, n0 - 1) - e * std::pow(x2, n0));
  double b1 = h * scale * (e * std::pow(x1, n0) - f * std::pow(x1, n0 - 1));

  const double dc = (x1 - 1.0) * (p * mbb - pb * mb * x1);
  const double dd = (1.0 - x2) * (pb * mb * x2 - p * mbb);
  check_denominator(dc, "C1");
  check_denominator(dd, "D1");
  double c1 = th * a1 * ((x1 - 1.0) * (pb * mv * x1 - p * mvb) + x1) / dc;
  double d1 = th * b1 * ((x2 - 1.0) * (pb * mv * x2 - p * mvb) + x2) / dd;

  auto vac = [&](int n) { return a1 * std::pow(x1, n) + b1 * std::pow(x2, n); };
  auto part = [&](int n) { return c1 * std::pow(x1, n) + d1 * std::pow(x2, n); };

  const double da = pb * mb * (1.0 - alpha);
  const double db = pb * mb * alpha * (1.0 - alpha);
  check_denominator(da, "A2");
  check_denominator(db, "B2");
  double a2 = (pb * mb * thb - pb * mb * (part(2) - alpha * part(1)) -
               th * pb * mv * vac(2) - th * (1.0 - p * mvb) * vac(1)) / da;
  double b2 = (pb * mb * (part(2) - part(1)) + th * pb * mv * vac(2) +
               th * (1.0 - p * mvb) * vac(1) - (p * mbb - pb * mb * th)) / db;

  const double boundary_busy =
      alpha * (a2 + b2 * std::pow(alpha, n0) + part(n0)) +
      p * th * mvb / (pb * mb * (1.0 - thb * mvb)) * vac(n0);
  double b3 = std::pow(alpha, -1 - n0) * boundary_busy;

  // Unnormalized total mass.
  double total = pb * mv / p * vac(1) + pb * mb / p;
  for (int n = 1; n <= n0; ++n) total += vac(n);
  total += p * thb * mvb / (1.0 - thb * mvb) * vac(n0);
  for (int n = 1; n <= n0; ++n) total += a2 + b2 * std::pow(alpha, n) + part(n);
  total += boundary_busy;
  for (int n = n0 + 2; n <= n1; ++n) total += b3 * std::pow(alpha, n);
  total += pb * std::pow(alpha, n1 - n0) * boundary_busy;
  if (!std::isfinite(total) || !(total > 0.0))
    throw NumericalInstability("closed-form mass is not positive");

  const double pi11 = 1.0 / total;
  return {a1 * pi11, b1 * pi11, c1 * pi11, d1 * pi11,
          a2 * pi11, b2 * pi11, b3 * pi11, pi11, h};
}

ObservableStationary closed_form_distribution(const QueueParams& q,
                                              ThresholdPair t) {
  const ObservableCoefficients k = closed_form_coefficients(q, t);
  const auto [x1, x2] = characteristic_roots(q);
  const double p = q.p, pb = complement(q.p);
  const double mb = q.mu_b, mvb = complement(q.mu_v);
  const double th = q.theta, thb = complement(q.theta);
  const double alpha = busy_traffic_ratio(q.p, q.mu_b);
  const int n0 = t.n0, n1 = t.n1;

  auto vac = [&](int n) { return k.a1t * std::pow(x1, n) + k.b1t * std::pow(x2, n); };
  auto busy_low = [&](int n) {
    return k.a2t + k.b2t * std::pow(alpha, n) + k.c1t * std::pow(x1, n) +
           k.d1t * std::pow(x2, n);
  };

  ObservableStationary out;
  out.method = SolveMethod::ClosedForm;
  auto& pi = out.probabilities;
  using enum ServerPhase;
  pi[{0, Vacation}] = pb * q.mu_v / p * vac(1) + pb * mb / p * k.pi11;
  for (int n = 1; n <= n0; ++n) pi[{n, Vacation}] = vac(n);
  pi[{n0 + 1, Vacation}] = p * thb * mvb / (1.0 - thb * mvb) * vac(n0);
  for (int n = 1; n <= n0; ++n) pi[{n, Busy}] = busy_low(n);
  const double boundary_busy =
      alpha * busy_low(n0) + p * th * mvb / (pb * mb * (1.0 - thb * mvb)) * vac(n0);
  pi[{n0 + 1, Busy}] = boundary_busy;
  for (int n = n0 + 2; n <= n1; ++n) pi[{n, Busy}] = k.b3t * std::pow(alpha, n);
  pi[{n1 + 1, Busy}] = pb * std::pow(alpha, n1 - n0) * boundary_busy;

  for (auto& [s, v] : pi) {
    if (!std::isfinite(v) || v < -1e-12)
      throw NumericalInstability("negative closed-form probability at " + to_string(s));
    v = std::max(v, 0.0);
  }
  return out;
}

TransitionMatrix transition_matrix(const QueueParams& q, ThresholdPair t) {
  const int cap = std::max(t.n0, t.n1) + 2;
  return build_chain(
      q, [t](SystemState s) { return t.joins(s) ? 1.0 : 0.0; }, std::max(cap, 1));
}

ObservableStationary linear_solve_distribution(const TransitionMatrix& m) {
  const Eigen::VectorXd pi = stationary_vector(m.p);
  ObservableStationary out;
  out.method = SolveMethod::LinearSolve;
  for (std::size_t i = 0; i < m.states.size(); ++i)
    out.probabilities[m.states[i]] = std::max(pi(static_cast<Eigen::Index>(i)), 0.0);
  return out;
}

ObservableStationary stationary_distribution(const QueueParams& q,
                                             ThresholdPair t) {
  if (t.n0 >= 1 && t.n1 >= t.n0 + 2) {
    try {
      return closed_form_distribution(q, t);
    } catch (const Error&) {
      // The linear solve defines the distribution; the closed form is a shortcut.
    }
  }
  return linear_solve_distribution(transition_matrix(q, t));
}

double balking_probability(const ObservableStationary& dist, ThresholdPair t) {
  double balk = 0.0;
  for (const auto& [s, v] : dist.probabilities)
    if (!t.joins(s)) balk += v;
  return balk;
}

double social_benefit(const Model& m, const ObservableStationary& dist,
                      ThresholdPair t) {
  return m.queue.p * m.econ.reward * (1.0 - balking_probability(dist, t)) -
         m.econ.cost * dist.mean_count();
}

double social_benefit(const Model& m, ThresholdPair t) {
  return social_benefit(m, stationary_distribution(m.queue, t), t);
}

ThresholdPair socially_optimal_thresholds(const Model& m,
                                          std::optional<ThresholdPair> cap) {
  if (!cap) {
    const ThresholdPair eq = equilibrium_thresholds(m);
    cap = ThresholdPair{eq.n0 + 5, eq.n1 + 5};
  }
  ThresholdPair best{-1, -1};
  double best_value = -std::numeric_limits<double>::infinity();
  for (int n0 = -1; n0 <= cap->n0; ++n0) {
    for (int n1 = -1; n1 <= cap->n1; ++n1) {
      const ThresholdPair t{n0, n1};
      const double v = social_benefit(m, t);
      if (v > best_value) {
        best_value = v;
        best = t;
      }
    }
  }
  return best;
}

}  // namespace wvq::observable
