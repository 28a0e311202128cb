#include <cstdio>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cli.hpp"
#include "wvq/observable.hpp"
#include "wvq/partial.hpp"
#include "wvq/unobservable.hpp"

namespace wvq::cli {

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::vector<std::string> map_points(std::size_t count,
                                    const std::function<std::string(std::size_t)>& f,
                                    int jobs) {
  std::vector<std::string> out(count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  const auto width = static_cast<std::size_t>(jobs);
  for (std::size_t start = 0; start < count; start += width) {
    std::vector<std::future<std::string>> running;
    for (std::size_t i = start; i < std::min(count, start + width); ++i)
      running.push_back(std::async(std::launch::async, f, i));
    for (std::size_t k = 0; k < running.size(); ++k) out[start + k] = running[k].get();
  }
  return out;
}

namespace {

struct Figure {
  const char* swept;
  Model base;
  std::vector<double> grid;
  std::vector<std::string> columns;
  std::function<std::vector<double>(const Model&)> row;
  std::function<void(Model&, double)> set;
};

std::vector<double> p_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 99; ++i) g.push_back(i / 100.0);
  return g;
}

std::vector<double> mu_b_grid() {
  std::vector<double> g;
  for (int i = 5; i <= 9; ++i) g.push_back(i / 10.0);
  return g;
}

void set_p(Model& m, double x) { m.queue.p = x; }
void set_mu_b(Model& m, double x) { m.queue.mu_b = x; }

Model model(double p, double mu_b, double mu_v, double theta, double r, double c) {
  return {{p, mu_b, mu_v, theta}, {r, c}};
}

std::string suffix(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

Figure make_figure(const std::string& id) {
  using namespace observable;
  if (id == "fig1")
    return {"mu_b", model(0.5, 0.8, 0.4, 0.2, 10, 1), mu_b_grid(), {"n_e0", "n_e1"},
            [](const Model& m) {
              const auto t = equilibrium_thresholds(m);
              return std::vector<double>{double(t.n0), double(t.n1)};
            },
            set_mu_b};
  if (id == "fig3")
    return {"p", model(0.5, 0.8, 0.4, 0.05, 10, 1), p_grid(), {"U_s"},
            [](const Model& m) {
              return std::vector<double>{social_benefit(m, equilibrium_thresholds(m))};
            },
            set_p};
  if (id == "fig4")
    return {"mu_b", model(0.5, 0.8, 0.4, 0.3, 10, 1), mu_b_grid(),
            {"n_e0", "n_e1", "n_star0", "n_star1"},
            [](const Model& m) {
              const auto e = equilibrium_thresholds(m);
              const auto s = socially_optimal_thresholds(m);
              return std::vector<double>{double(e.n0), double(e.n1), double(s.n0), double(s.n1)};
            },
            set_mu_b};
  if (id == "fig6") {
    Figure f{"p", model(0.5, 0.8, 0.4, 0.1, 8, 3), p_grid(), {}, {}, set_p};
    const std::vector<double> thetas{0.1, 0.3, 0.5};
    for (double th : thetas) {
      f.columns.push_back("q_e0_theta_" + suffix(th));
      f.columns.push_back("q_e1_theta_" + suffix(th));
    }
    f.row = [thetas](const Model& m) {
      std::vector<double> v;
      for (double th : thetas) {
        Model mm = m;
        mm.queue.theta = th;
        const auto q = partial::equilibrium_mixed(mm);
        v.push_back(q.q0);
        v.push_back(q.q1);
      }
      return v;
    };
    return f;
  }
  if (id == "fig7")
    return {"p", model(0.5, 0.9, 0.5, 0.05, 10, 3), p_grid(), {"q_e0", "q_e1", "U_s"},
            [](const Model& m) {
              const auto q = partial::equilibrium_mixed(m);
              return std::vector<double>{q.q0, q.q1, partial::social_benefit(m, q)};
            },
            set_p};
  if (id == "fig8")
    return {"p", model(0.5, 0.9, 0.5, 0.05, 10, 3), p_grid(),
            {"q_e0", "q_e1", "q_star0", "q_star1"},
            [](const Model& m) {
              const auto e = partial::equilibrium_mixed(m);
              const auto s = partial::socially_optimal_mixed(m);
              return std::vector<double>{e.q0, e.q1, s.q0, s.q1};
            },
            set_p};
  if (id == "fig10") {
    Figure f{"p", model(0.5, 0.9, 0.5, 0.3, 4.5, 1), p_grid(), {}, {}, set_p};
    const std::vector<double> rates{0.7, 0.8, 0.9};
    for (double mb : rates) f.columns.push_back("q_e_mu_b_" + suffix(mb));
    f.row = [rates](const Model& m) {
      std::vector<double> v;
      for (double mb : rates) {
        Model mm = m;
        mm.queue.mu_b = mb;
        v.push_back(unobservable::equilibrium_join_probability(mm));
      }
      return v;
    };
    return f;
  }
  if (id == "fig11")
    return {"p", model(0.5, 0.9, 0.5, 0.3, 4.5, 1), p_grid(), {"q_e", "U_s"},
            [](const Model& m) {
              const double q = unobservable::equilibrium_join_probability(m);
              return std::vector<double>{q, unobservable::social_benefit(m, q)};
            },
            set_p};
  if (id == "fig12")
    return {"p", model(0.5, 0.9, 0.5, 0.3, 4.5, 1), p_grid(), {"q_e", "q_star"},
            [](const Model& m) {
              return std::vector<double>{unobservable::equilibrium_join_probability(m),
                                         unobservable::socially_optimal_join_probability(m)};
            },
            set_p};
  throw std::invalid_argument("unknown figure id: " + id);
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1", "fig3",  "fig4",  "fig6", "fig7",
                                            "fig8", "fig10", "fig11", "fig12"};
  return ids;
}

std::string figure_csv(const std::string& id, const Overrides& o, int jobs) {
  Figure f = make_figure(id);
  Model& b = f.base;
  if (o.p) b.queue.p = *o.p;
  if (o.mu_b) b.queue.mu_b = *o.mu_b;
  if (o.mu_v) b.queue.mu_v = *o.mu_v;
  if (o.theta) b.queue.theta = *o.theta;
  if (o.reward) b.econ.reward = *o.reward;
  if (o.cost) b.econ.cost = *o.cost;
  validate(b);

  std::string out = f.swept;
  for (const auto& c : f.columns) out += "," + c;
  out += "\n";
  const auto rows = map_points(
      f.grid.size(),
      [&](std::size_t i) {
        Model m = f.base;
        f.set(m, f.grid[i]);
        validate(m);
        std::string line = format_number(f.grid[i]);
        for (double v : f.row(m)) line += "," + format_number(v);
        return line + "\n";
      },
      jobs);
  for (const auto& r : rows) out += r;
  return out;
}

}  // namespace wvq::cli
