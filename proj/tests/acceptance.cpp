// Acceptance checks: one PASS/FAIL line per criterion.
// Usage: acceptance [--criterion N]...   (all criteria when none given)

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "support/oracles.hpp"
#include "wvq/observable.hpp"
#include "wvq/partial.hpp"
#include "wvq/simulator.hpp"
#include "wvq/unobservable.hpp"

using namespace wvq;

namespace {

// Tolerances and sizes.
constexpr int kObservableInstances = 200;
constexpr double kClosedFormTol = 1e-9;
constexpr double kBalanceTol = 1e-10;
constexpr double kObservableSeconds = 10.0;
constexpr int kRateMatrixInstances = 500;
constexpr double kRateMatrixTol = 1e-12;
constexpr double kTwoSeventhsTol = 1e-12;
constexpr int kPartialInstances = 100;
constexpr double kTruncatedTol = 1e-8;
constexpr double kPartialSeconds = 30.0;
constexpr int kPgfInstances = 50;
constexpr double kPgfUnitTol = 1e-10;
constexpr double kPgfMeanRelTol = 1e-5;
constexpr std::uint64_t kSimulationSlots = 1'000'000;
constexpr double kSimulationSeconds = 120.0;
constexpr double kPeakTol = 1e-9;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) { return cli::format_number(x); }

struct ObservableInstance {
  QueueParams q;
  observable::ThresholdPair t;
};

// Random parameters with alpha < 1, separated roots, and equilibrium
// thresholds of the closed-form shape.
std::vector<ObservableInstance> observable_instances() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> reward(2.0, 40.0);
  std::vector<ObservableInstance> out;
  while (out.size() < static_cast<std::size_t>(kObservableInstances)) {
    const QueueParams q = oracle::random_params(rng);
    if (busy_traffic_ratio(q.p, q.mu_b) >= 1.0) continue;
    const auto roots = observable::characteristic_roots(q);
    if (std::abs(roots.x1 - roots.x2) <= 1e-6) continue;
    const Model m = validate(q, EconParams{reward(rng), 1.0});
    const auto t = observable::equilibrium_thresholds(m);
    if (t.n0 < 1 || t.n1 < t.n0 + 2) continue;
    out.push_back({q, t});
  }
  return out;
}

Verdict criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto instances = observable_instances();
  double worst = 0.0;
  int failures = 0;
  for (const auto& [q, t] : instances) {
    try {
      const auto closed = observable::closed_form_distribution(q, t);
      const auto lin = observable::linear_solve_distribution(observable::transition_matrix(q, t));
      for (const auto& [s, v] : lin.probabilities)
        worst = std::max(worst, std::abs(v - closed.prob(s)));
      if (closed.probabilities.size() != lin.probabilities.size()) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = failures == 0 && worst <= kClosedFormTol && secs <= kObservableSeconds;
  v.detail = std::to_string(instances.size()) + " instances, max abs error " + fmt(worst) +
             ", closed-form failures " + std::to_string(failures) + ", " + fmt(secs) + " s";
  return v;
}

Verdict criterion2() {
  const auto instances = observable_instances();
  double worst = 0.0;
  std::string worst_eq;
  int failures = 0;
  for (const auto& [q, t] : instances) {
    try {
      const auto d = observable::closed_form_distribution(q, t);
      const auto res = oracle::observable_balance_residuals(q, t, [&](int n, int j) {
        return d.prob({n, j ? ServerPhase::Busy : ServerPhase::Vacation});
      });
      for (const auto& [name, r] : res)
        if (r > worst) {
          worst = r;
          worst_eq = name;
        }
    } catch (const Error&) {
      ++failures;
    }
  }
  Verdict v;
  v.pass = failures == 0 && worst <= kBalanceTol;
  v.detail = std::to_string(instances.size()) + " instances, max residual " + fmt(worst) +
             (worst_eq.empty() ? "" : " (" + worst_eq + ")");
  return v;
}

Verdict criterion3() {
  std::mt19937_64 rng(20240602);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int n = 0;
  while (n < kRateMatrixInstances) {
    const QueueParams q = oracle::random_params(rng);
    const partial::MixedPair m{u(rng), u(rng)};
    const auto rm = partial::minimal_rate_matrix(q, m);
    if (rm.alpha_t >= 1.0) continue;
    worst = std::max(worst, partial::rate_matrix_residual(partial::level_blocks(q, m), rm));
    ++n;
  }
  const double r = partial::vacation_rate_ratio({0.3, 0.6, 0.4, 0.2}, 0.3);
  const double off = std::abs(r - 2.0 / 7.0);
  Verdict v;
  v.pass = worst <= kRateMatrixTol && off <= kTwoSeventhsTol;
  v.detail = std::to_string(n) + " instances, max residual " + fmt(worst) +
             ", |r - 2/7| = " + fmt(off);
  return v;
}

Verdict criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240603);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int n = 0, max_level = 0;
  while (n < kPartialInstances) {
    const QueueParams q = oracle::random_params(rng);
    const partial::MixedPair m{u(rng), u(rng)};
    const auto rm = partial::minimal_rate_matrix(q, m);
    if (rm.alpha_t >= 1.0) continue;
    const auto d = partial::stationary_distribution(q, m);
    const int level = partial::oracle_level(q, m);
    max_level = std::max(max_level, level);
    const auto chain = partial::truncated_chain(q, m, level);
    const auto pi = partial::truncated_chain_oracle(chain);
    for (std::size_t i = 0; i < chain.states.size(); ++i)
      worst = std::max(worst, std::abs(pi(Eigen::Index(i)) - d.prob(chain.states[i])));
    ++n;
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = worst <= kTruncatedTol && secs <= kPartialSeconds;
  v.detail = std::to_string(n) + " instances, max abs error " + fmt(worst) +
             ", deepest truncation " + std::to_string(max_level) + ", " + fmt(secs) + " s";
  return v;
}

Verdict criterion5() {
  std::mt19937_64 rng(20240604);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double unit_err = 0.0, rel_err = 0.0;
  int n = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  while (n < kPgfInstances) {
    const QueueParams q = oracle::random_params(rng);
    const partial::MixedPair m{u(rng), u(rng)};
    if (partial::minimal_rate_matrix(q, m).alpha_t >= 0.95) continue;
    ++n;
    const int k = n % 8;
    const auto d = [](const std::function<double(double)>& f) { return oracle::derivative(f, 1.0); };
    const double w0s = observable::sojourn_pgf_vacation(k, q, 1.0);
    const double w1s = observable::sojourn_pgf_busy(k + 1, q, 1.0);
    const double w0 = partial::sojourn_pgf_vacation(q, m, 1.0);
    const double w1 = partial::sojourn_pgf_busy(q, m, 1.0);
    for (double x : {w0s, w1s, w0, w1}) unit_err = std::max(unit_err, std::abs(x - 1.0));
    rel_err = std::max(
        {rel_err,
         rel(d([&](double z) { return observable::sojourn_pgf_vacation(k, q, z); }),
             observable::mean_sojourn_vacation(k, q)),
         rel(d([&](double z) { return observable::sojourn_pgf_busy(k + 1, q, z); }),
             observable::mean_sojourn_busy(k + 1, q)),
         rel(d([&](double z) { return partial::sojourn_pgf_vacation(q, m, z); }),
             partial::mean_sojourn_vacation(q, m)),
         rel(d([&](double z) { return partial::sojourn_pgf_busy(q, m, z); }),
             partial::mean_sojourn_busy(q, m))});
  }
  Verdict v;
  v.pass = unit_err <= kPgfUnitTol && rel_err <= kPgfMeanRelTol;
  v.detail = std::to_string(n) + " instances, max |PGF(1) - 1| " + fmt(unit_err) +
             ", max relative mean error " + fmt(rel_err);
  return v;
}

Verdict criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  sim::SimConfig cfg;
  cfg.slots = kSimulationSlots;
  cfg.warmup = 10'000;
  cfg.seed = 1;
  Verdict v;
  int rows = 0;
  double worst_z = 0.0;
  for (cli::Case c : {cli::Case::Observable, cli::Case::Partial, cli::Case::Unobservable}) {
    const auto rep = cli::validate_case(c, cli::default_validation_model(c), cfg);
    rows += static_cast<int>(rep.rows.size());
    for (const auto& r : rep.rows) {
      worst_z = std::max(worst_z, std::abs(r.z));
      if (!r.pass) v.detail += "failed " + r.metric + "; ";
    }
    v.pass = v.pass && rep.pass;
  }
  cfg.corrupt_event_order = true;
  const bool control_failed =
      !cli::validate_case(cli::Case::Observable, cli::default_validation_model(cli::Case::Observable),
                          cfg)
           .pass;
  const double secs = seconds_since(t0);
  v.pass = v.pass && control_failed && secs <= kSimulationSeconds;
  v.detail += std::to_string(rows) + " compared quantities, max |z| " + fmt(worst_z) +
              ", corrupted order " + (control_failed ? "rejected" : "accepted") + ", " +
              fmt(secs) + " s";
  return v;
}

using Table = std::vector<std::vector<double>>;

Table parse_csv(const std::string& csv, std::vector<std::string>& header) {
  std::istringstream in(csv);
  std::string line, cell;
  std::getline(in, line);
  header.clear();
  for (std::istringstream h(line); std::getline(h, cell, ',');) header.push_back(cell);
  Table rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    for (std::istringstream r(line); std::getline(r, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

struct Figure {
  std::vector<std::string> header;
  Table rows;
  std::vector<double> col(const std::string& name) const {
    const auto i = static_cast<std::size_t>(std::find(header.begin(), header.end(), name) -
                                            header.begin());
    if (i >= header.size()) throw std::runtime_error("missing column " + name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[i]);
    return out;
  }
};

Figure figure(const std::string& id) {
  Figure f;
  f.rows = parse_csv(cli::figure_csv(id), f.header);
  return f;
}

Verdict criterion7() {
  std::vector<std::string> failed;
  auto claim = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  auto nondecreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] < v[i - 1]) return false;
    return true;
  };

  const auto f1 = figure("fig1");
  const auto e0 = f1.col("n_e0"), e1 = f1.col("n_e1");
  std::vector<double> gap;
  for (std::size_t i = 0; i < e0.size(); ++i) gap.push_back(e1[i] - e0[i]);
  claim(nondecreasing(e0) && nondecreasing(e1), "fig1 thresholds nondecreasing in mu_b");
  claim(nondecreasing(gap), "fig1 n_e(1)-n_e(0) nondecreasing");

  for (const std::string id : {"fig3", "fig7", "fig11"})
    claim(oracle::single_peak(figure(id).col("U_s"), kPeakTol), id + " U_s single peak");

  const auto f4 = figure("fig4");
  {
    const auto a0 = f4.col("n_e0"), a1 = f4.col("n_e1");
    const auto s0 = f4.col("n_star0"), s1 = f4.col("n_star1");
    bool ok = true;
    for (std::size_t i = 0; i < a0.size(); ++i) ok = ok && s0[i] <= a0[i] && s1[i] <= a1[i];
    claim(ok, "fig4 n* <= n_e");
  }

  const auto f6 = figure("fig6");
  {
    const auto p = f6.col("p");
    for (const std::string th : {"0.1", "0.3", "0.5"}) {
      const auto a = f6.col("q_e0_theta_" + th), b = f6.col("q_e1_theta_" + th);
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] < b[i]) {
          claim(false, "fig6 q_e(0) >= q_e(1) at theta=" + th + " from p=" + fmt(p[i]) +
                           " (q_e=" + fmt(a[i]) + "," + fmt(b[i]) + ")");
          break;
        }
    }
  }

  const auto f8 = figure("fig8");
  {
    const auto a0 = f8.col("q_e0"), a1 = f8.col("q_e1");
    const auto s0 = f8.col("q_star0"), s1 = f8.col("q_star1");
    bool ok = true;
    for (std::size_t i = 0; i < a0.size(); ++i) ok = ok && s0[i] <= a0[i] && s1[i] <= a1[i];
    claim(ok, "fig8 q* <= q_e");
  }
  const auto f12 = figure("fig12");
  {
    const auto e = f12.col("q_e"), s = f12.col("q_star");
    bool ok = true;
    for (std::size_t i = 0; i < e.size(); ++i) ok = ok && s[i] <= e[i];
    claim(ok, "fig12 q* <= q_e");
  }

  const auto f10 = figure("fig10");
  {
    bool mono = true;
    for (const std::string mb : {"0.7", "0.8", "0.9"}) {
      const auto c = f10.col("q_e_mu_b_" + mb);
      for (std::size_t i = 1; i < c.size(); ++i) mono = mono && c[i] <= c[i - 1];
    }
    claim(mono, "fig10 q_e nonincreasing in p");
    const auto lo = f10.col("q_e_mu_b_0.7"), hi = f10.col("q_e_mu_b_0.9");
    bool ordered = true;
    for (std::size_t i = 0; i < lo.size(); ++i) ordered = ordered && lo[i] <= hi[i];
    claim(ordered, "fig10 q_e(mu_b=0.7) <= q_e(mu_b=0.9)");
  }

  Verdict v;
  v.pass = failed.empty();
  if (v.pass) v.detail = "all figure claims hold";
  for (const auto& f : failed) v.detail += (v.detail.empty() ? "" : "; ") + f;
  return v;
}

Verdict criterion8() {
  std::vector<std::string> differing;
  auto invoke = [](std::vector<std::string> args) {
    args.insert(args.begin(), "wvq");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return std::to_string(code) + "\n" + out.str();
  };
  for (const auto& id : cli::figure_ids()) {
    const auto a = invoke({"figure", id});
    if (a != invoke({"figure", id}) || a != invoke({"figure", id, "--jobs", "4"}))
      differing.push_back(id);
  }
  for (const std::string c : {"observable", "partial", "unobservable"}) {
    const auto a = invoke({"validate", c, "--seed", "12345"});
    if (a != invoke({"validate", c, "--seed", "12345"})) differing.push_back("validate " + c);
  }
  Verdict v;
  v.pass = differing.empty();
  v.detail = v.pass ? std::to_string(cli::figure_ids().size()) +
                          " figures and 3 validation reports byte-identical"
                    : "differs:";
  for (const auto& d : differing) v.detail += " " + d;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "criterion number (repeatable)")
      ->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  const std::vector<Verdict (*)()> criteria{criterion1, criterion2, criterion3, criterion4,
                                            criterion5, criterion6, criterion7, criterion8};
  bool all = true;
  for (int n : selected) {
    Verdict v;
    try {
      v = criteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
