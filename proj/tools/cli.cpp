#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "wvq/observable.hpp"
#include "wvq/partial.hpp"
#include "wvq/unobservable.hpp"

namespace wvq::cli {

namespace {

struct ParamOptions {
  double p = 0, mu_b = 0, mu_v = 0, theta = 0, reward = 0, cost = 0;
  std::vector<CLI::Option*> options;

  void add(CLI::App& app, bool required) {
    options = {app.add_option("--p", p, "arrival probability per slot"),
               app.add_option("--mu-b", mu_b, "regular service probability"),
               app.add_option("--mu-v", mu_v, "vacation service probability"),
               app.add_option("--theta", theta, "vacation termination probability"),
               app.add_option("--reward", reward, "reward R for a completed service"),
               app.add_option("--cost", cost, "waiting cost C per slot")};
    if (required)
      for (auto* o : options) o->required();
  }

  // Values given on the command line replace those of `base`.
  Model apply(Model base) const {
    double* fields[] = {&base.queue.p,     &base.queue.mu_b,  &base.queue.mu_v,
                        &base.queue.theta, &base.econ.reward, &base.econ.cost};
    const double values[] = {p, mu_b, mu_v, theta, reward, cost};
    for (std::size_t i = 0; i < options.size(); ++i)
      if (options[i]->count()) *fields[i] = values[i];
    return base;
  }

  Overrides overrides() const {
    Overrides o;
    std::optional<double>* fields[] = {&o.p, &o.mu_b, &o.mu_v, &o.theta, &o.reward, &o.cost};
    const double values[] = {p, mu_b, mu_v, theta, reward, cost};
    for (std::size_t i = 0; i < options.size(); ++i)
      if (options[i]->count()) *fields[i] = values[i];
    return o;
  }
};

struct StrategyOptions {
  int n0 = -1, n1 = -1;
  double q0 = 0, q1 = 0, q = 0;
  CLI::Option *o_n0{}, *o_n1{}, *o_q0{}, *o_q1{}, *o_q{};

  void add(CLI::App& app) {
    o_n0 = app.add_option("--n0", n0, "observable: vacation-phase threshold");
    o_n1 = app.add_option("--n1", n1, "observable: busy-phase threshold");
    o_q0 = app.add_option("--q0", q0, "partial: join probability in vacation");
    o_q1 = app.add_option("--q1", q1, "partial: join probability when busy");
    o_q = app.add_option("--q", q, "unobservable: join probability");
    o_n0->needs(o_n1);
    o_n1->needs(o_n0);
    o_q0->needs(o_q1);
    o_q1->needs(o_q0);
  }

  std::optional<sim::Strategy> get(Case c) const {
    switch (c) {
      case Case::Observable:
        if (o_n0->count()) return observable::ThresholdPair{n0, n1};
        break;
      case Case::Partial:
        if (o_q0->count()) return partial::MixedPair{q0, q1};
        break;
      case Case::Unobservable:
        if (o_q->count()) return sim::Blind{q};
        break;
    }
    return std::nullopt;
  }
};

const std::map<std::string, Case> kCases{{"observable", Case::Observable},
                                         {"partial", Case::Partial},
                                         {"unobservable", Case::Unobservable}};

class Report {
 public:
  template <class T>
  void put(const std::string& key, T value) {
    if constexpr (std::is_floating_point_v<T>)
      text_ += key + "=" + format_number(value) + "\n";
    else if constexpr (std::is_same_v<T, bool>)
      text_ += key + "=" + (value ? "true" : "false") + "\n";
    else if constexpr (std::is_integral_v<T>)
      text_ += key + "=" + std::to_string(value) + "\n";
    else
      text_ += key + "=" + std::string(value) + "\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

void analyze_observable(const Model& m, std::optional<sim::Strategy> given, Report& out) {
  const auto eq = observable::equilibrium_thresholds(m);
  const auto star = observable::socially_optimal_thresholds(m);
  const auto dist = observable::stationary_distribution(m.queue, eq);
  out.put("n_e(0)", eq.n0);
  out.put("n_e(1)", eq.n1);
  out.put("n_star(0)", star.n0);
  out.put("n_star(1)", star.n1);
  out.put("U_s(equilibrium)", observable::social_benefit(m, dist, eq));
  out.put("U_s(optimal)", observable::social_benefit(m, star));
  out.put("method", dist.method == observable::SolveMethod::ClosedForm ? "closed_form"
                                                                        : "linear_solve");
  double vac = 0.0;
  for (const auto& [s, v] : dist.probabilities)
    if (s.phase == ServerPhase::Vacation) vac += v;
  out.put("P(J=0)", vac);
  out.put("P(J=1)", 1.0 - vac);
  out.put("E[L]", dist.mean_count());
  out.put("balk_probability", observable::balking_probability(dist, eq));
  out.put("states", static_cast<int>(dist.probabilities.size()));
  if (given) {
    const auto t = std::get<observable::ThresholdPair>(*given);
    out.put("U_s(given)", observable::social_benefit(m, t));
  }
}

void analyze_partial(const Model& m, std::optional<sim::Strategy> given, Report& out,
                     std::ostream& err) {
  const auto rep = partial::equilibrium_mixed_report(m);
  const auto eq = rep.value;
  if (!rep.vacation_monotone || !rep.busy_monotone)
    err << "note: net benefit not monotone on the check grid; sign scan used\n";
  if (eq.q1 == 0.0)
    err << "note: busy-phase benefit negative at q1=0; q_e(1) clamped at 0\n";
  const auto star = partial::socially_optimal_mixed(m);
  const auto dist = partial::stationary_distribution(m.queue, eq);
  const auto reg = partial::regime_probabilities(dist);
  out.put("q_e(0)", eq.q0);
  out.put("q_e(1)", eq.q1);
  out.put("q_star(0)", star.q0);
  out.put("q_star(1)", star.q1);
  out.put("U_s(equilibrium)", partial::social_benefit(m, eq));
  out.put("U_s(optimal)", partial::social_benefit(m, star));
  out.put("r", dist.r);
  out.put("alpha_t", dist.alpha_t);
  out.put("P(J=0)", reg.vacation);
  out.put("P(J=1)", reg.busy);
  out.put("E[L]", partial::mean_queue_length(dist));
  out.put("E[W0]", partial::mean_sojourn_vacation(m.queue, eq));
  out.put("E[W1]", partial::mean_sojourn_busy(m.queue, eq));
  if (given) {
    const auto q = std::get<partial::MixedPair>(*given);
    partial::validate(q);
    try {
      const double u = partial::social_benefit(m, q);
      out.put("stable(given)", true);
      out.put("U_s(given)", u);
    } catch (const Unstable& e) {
      out.put("stable(given)", false);
      err << "note: given strategy is unstable: " << e.what() << "\n";
    }
  }
}

void analyze_unobservable(const Model& m, std::optional<sim::Strategy> given, Report& out,
                          std::ostream& err) {
  const auto rep = unobservable::equilibrium_report(m);
  if (!rep.monotone)
    err << "note: net benefit not monotone on the check grid; sign scan found "
        << rep.sign_changes << " sign change(s)\n";
  const double qe = rep.value;
  const double qs = unobservable::socially_optimal_join_probability(m);
  out.put("q_e", qe);
  out.put("q_star", qs);
  out.put("U_s(equilibrium)", unobservable::social_benefit(m, qe));
  out.put("U_s(optimal)", unobservable::social_benefit(m, qs));
  if (qe > 0.0) {
    const auto d = unobservable::decomposition_check(m.queue, qe);
    out.put("E[W]", d.direct);
    out.put("E[W]_by_phase", d.by_phase);
  }
  if (given) {
    const double q = std::get<sim::Blind>(*given).q;
    try {
      const double u = unobservable::social_benefit(m, q);
      out.put("stable(given)", true);
      out.put("U_s(given)", u);
    } catch (const Unstable& e) {
      out.put("stable(given)", false);
      err << "note: given strategy is unstable: " << e.what() << "\n";
    }
  }
}

std::string sweep_csv(Case c, const std::string& param, double from, double to, double step,
                      const Model& fixed, int jobs) {
  if (!(step > 0.0)) throw InvalidParameter("step", step);
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  if (!(to > from) || count < 2) throw InvalidParameter("to", to);

  auto set = [&](Model& m, double x) {
    if (param == "p") m.queue.p = x;
    else if (param == "mu_b") m.queue.mu_b = x;
    else if (param == "mu_v") m.queue.mu_v = x;
    else if (param == "theta") m.queue.theta = x;
    else if (param == "R") m.econ.reward = x;
    else m.econ.cost = x;
  };
  std::vector<Model> points(count, fixed);
  for (std::size_t i = 0; i < count; ++i) {
    set(points[i], from + static_cast<double>(i) * step);
    validate(points[i]);
  }

  std::string out = param;
  switch (c) {
    case Case::Observable: out += ",n_e0,n_e1,n_star0,n_star1,U_s_e,U_s_star\n"; break;
    case Case::Partial: out += ",q_e0,q_e1,q_star0,q_star1,U_s_e,U_s_star\n"; break;
    case Case::Unobservable: out += ",q_e,q_star,U_s_e,U_s_star\n"; break;
  }
  const auto rows = map_points(
      count,
      [&](std::size_t i) {
        const Model& m = points[i];
        std::vector<double> v;
        switch (c) {
          case Case::Observable: {
            const auto e = observable::equilibrium_thresholds(m);
            const auto s = observable::socially_optimal_thresholds(m);
            v = {double(e.n0), double(e.n1), double(s.n0), double(s.n1),
                 observable::social_benefit(m, e), observable::social_benefit(m, s)};
            break;
          }
          case Case::Partial: {
            const auto e = partial::equilibrium_mixed(m);
            const auto s = partial::socially_optimal_mixed(m);
            v = {e.q0, e.q1, s.q0, s.q1, partial::social_benefit(m, e),
                 partial::social_benefit(m, s)};
            break;
          }
          case Case::Unobservable: {
            const double e = unobservable::equilibrium_join_probability(m);
            const double s = unobservable::socially_optimal_join_probability(m);
            v = {e, s, unobservable::social_benefit(m, e), unobservable::social_benefit(m, s)};
            break;
          }
        }
        std::string line = format_number(from + static_cast<double>(i) * step);
        for (double x : v) line += "," + format_number(x);
        return line + "\n";
      },
      jobs);
  for (const auto& r : rows) out += r;
  return out;
}

// Moves `--config FILE` out of the arguments and appends its key=value lines
// as options not already given.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  auto given = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) continue;
    const std::string value = eq == std::string::npos ? "" : trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value.empty() || value == "true") {
      args.push_back(flag);
    } else if (value != "false") {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibrium and social optimization for the Geo/Geo/1 queue with multiple "
               "working vacations"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Equilibrium and optimal strategies at one point");
  std::string analyze_case;
  analyze->add_option("case", analyze_case, "observable | partial | unobservable")
      ->required()
      ->check(CLI::IsMember({"observable", "partial", "unobservable"}));
  ParamOptions analyze_params;
  analyze_params.add(*analyze, true);
  StrategyOptions analyze_strategy;
  analyze_strategy.add(*analyze);

  // figure
  auto* figure = app.add_subcommand("figure", "CSV series of one figure");
  std::string figure_id;
  figure->add_option("id", figure_id, "figure id")->required()->check(CLI::IsMember(figure_ids()));
  ParamOptions figure_params;
  figure_params.add(*figure, false);
  int figure_jobs = 1;
  figure->add_option("--jobs", figure_jobs, "concurrent sweep points")->check(CLI::PositiveNumber);

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Simulation against the analytic results");
  std::string validate_case_name;
  validate_cmd->add_option("case", validate_case_name, "observable | partial | unobservable")
      ->required()
      ->check(CLI::IsMember({"observable", "partial", "unobservable"}));
  ParamOptions validate_params;
  validate_params.add(*validate_cmd, false);
  StrategyOptions validate_strategy;
  validate_strategy.add(*validate_cmd);
  std::uint64_t slots = 1'000'000, seed = 1;
  std::uint64_t warmup = 10'000;
  bool corrupt = false;
  validate_cmd->add_option("--slots", slots, "simulated slots");
  auto* warmup_opt = validate_cmd->add_option("--warmup", warmup, "discarded initial slots");
  validate_cmd->add_option("--seed", seed, "random seed")->envname("WVQ_SEED");
  validate_cmd->add_flag("--corrupt-event-order", corrupt,
                         "negative control: serve the post-arrival head");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Equilibrium and optimum over a parameter range");
  std::string sweep_case, sweep_param;
  double from = 0, to = 0, step = 0;
  int sweep_jobs = 1;
  sweep->add_option("--case", sweep_case, "observable | partial | unobservable")
      ->required()
      ->check(CLI::IsMember({"observable", "partial", "unobservable"}));
  sweep->add_option("--param", sweep_param, "swept parameter")
      ->required()
      ->check(CLI::IsMember({"p", "mu_b", "mu_v", "theta", "R", "C"}));
  sweep->add_option("--from", from)->required();
  sweep->add_option("--to", to)->required();
  sweep->add_option("--step", step)->required();
  ParamOptions sweep_params;
  sweep_params.add(*sweep, false);
  sweep->add_option("--jobs", sweep_jobs, "concurrent sweep points")->check(CLI::PositiveNumber);

  std::vector<std::string> args;
  try {
    args = expand_config(raw);
    std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(reversed.begin(), reversed.end());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return kBadInput;
  }

  try {
    std::string text;
    if (analyze->parsed()) {
      const Case c = kCases.at(analyze_case);
      const Model m = validate(analyze_params.apply({}));
      Report r;
      r.put("case", analyze_case);
      switch (c) {
        case Case::Observable: analyze_observable(m, analyze_strategy.get(c), r); break;
        case Case::Partial: analyze_partial(m, analyze_strategy.get(c), r, err); break;
        case Case::Unobservable: analyze_unobservable(m, analyze_strategy.get(c), r, err); break;
      }
      text = r.text();
    } else if (figure->parsed()) {
      text = figure_csv(figure_id, figure_params.overrides(), figure_jobs);
    } else if (validate_cmd->parsed()) {
      const Case c = kCases.at(validate_case_name);
      const Model m = validate(validate_params.apply(default_validation_model(c)));
      sim::SimConfig cfg;
      cfg.slots = slots;
      cfg.warmup = warmup_opt->count() ? warmup : std::min<std::uint64_t>(warmup, slots / 10);
      cfg.seed = seed;
      cfg.corrupt_event_order = corrupt;
      const auto report = validate_case(c, m, cfg, validate_strategy.get(c));
      out << report.csv();
      if (!report.pass) {
        err << "validation failed:";
        for (const auto& row : report.rows)
          if (!row.pass) err << " " << row.metric;
        err << "\n";
        return kValidationFailed;
      }
      return kOk;
    } else if (sweep->parsed()) {
      const std::map<std::string, std::size_t> slot{{"p", 0},     {"mu_b", 1}, {"mu_v", 2},
                                                    {"theta", 3}, {"R", 4},    {"C", 5}};
      for (std::size_t i = 0; i < sweep_params.options.size(); ++i) {
        if (i == slot.at(sweep_param)) continue;
        if (!sweep_params.options[i]->count()) {
          err << "error: " << sweep_params.options[i]->get_name() << " is required\n"
              << sweep->help();
          return kBadInput;
        }
      }
      Model fixed = sweep_params.apply({{0.5, 0.5, 0.5, 0.5}, {1.0, 1.0}});
      text = sweep_csv(kCases.at(sweep_case), sweep_param, from, to, step, fixed, sweep_jobs);
    }
    out << text;
    return kOk;
  } catch (const InvalidParameter& e) {
    err << "error: invalid " << e.field() << " = " << format_number(e.value()) << ": "
        << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUnstable;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace wvq::cli
