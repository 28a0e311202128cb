#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace wvq;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "wvq");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kFig1Flags{"--p",     "0.5", "--mu-b",   "0.8", "--mu-v", "0.4",
                                          "--theta", "0.2", "--reward", "10",  "--cost", "1"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

std::vector<std::string> csv_column(const std::string& csv, const std::string& name) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  const auto col = std::find(header.begin(), header.end(), name) - header.begin();
  std::vector<std::string> out;
  while (std::getline(in, line)) {
    std::istringstream r(line);
    std::string cell;
    for (long i = 0; i <= col; ++i) std::getline(r, cell, ',');
    out.push_back(cell);
  }
  return out;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(cli::format_number(0.5) == "0.5");
  CHECK(cli::format_number(2.0 / 7.0) == "0.285714285714");
  CHECK(cli::format_number(7.0) == "7");
  CHECK(cli::format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("analyze observable") {
  const auto r = run(with({"analyze", "observable"}, kFig1Flags));
  CHECK(r.code == 0);
  CHECK(r.out.find("n_e(1)=7\n") != std::string::npos);
  CHECK(r.out.find("n_e(0)=5\n") != std::string::npos);
  CHECK(r.out.find("method=closed_form\n") != std::string::npos);
}

TEST_CASE("analyze with a missing flag prints usage and exits 2") {
  auto args = with({"analyze", "observable"}, kFig1Flags);
  args.resize(args.size() - 2);
  const auto r = run(args);
  CHECK(r.code == 2);
  CHECK(r.err.find("--cost") != std::string::npos);
}

TEST_CASE("analyze rejects out-of-range parameters with exit 2") {
  auto args = with({"analyze", "observable"}, kFig1Flags);
  args[3] = "1.5";
  const auto r = run(args);
  CHECK(r.code == 2);
  CHECK(r.err.find("p") != std::string::npos);
  CHECK(run({"analyze", "nonsense"}).code == 2);
}

TEST_CASE("analyze partial with an unstable given strategy still reports the equilibrium") {
  const auto r = run({"analyze", "partial", "--p", "0.6", "--mu-b", "0.5", "--mu-v", "0.4",
                      "--theta", "0.2", "--reward", "10", "--cost", "1", "--q0", "1", "--q1",
                      "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("q_e(0)=") != std::string::npos);
  CHECK(r.out.find("stable(given)=false") != std::string::npos);
}

TEST_CASE("analyze unobservable") {
  const auto r = run({"analyze", "unobservable", "--p", "0.5", "--mu-b", "0.9", "--mu-v", "0.5",
                      "--theta", "0.3", "--reward", "4.5", "--cost", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("q_e=1\n") != std::string::npos);
}

TEST_CASE("figures are deterministic and have the documented columns") {
  CHECK(cli::figure_ids().size() == 9);
  for (const auto& id : cli::figure_ids()) {
    const auto a = run({"figure", id});
    const auto b = run({"figure", id});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == cli::figure_csv(id, {}, 3));
  }
  CHECK(run({"figure", "fig4"}).out.rfind("mu_b,n_e0,n_e1,n_star0,n_star1\n", 0) == 0);
  CHECK(run({"figure", "fig12"}).out.rfind("p,q_e,q_star\n", 0) == 0);
  CHECK(run({"figure", "fig99"}).code == 2);
}

TEST_CASE("figure overrides") {
  const auto base = run({"figure", "fig1"}).out;
  const auto rich = run({"figure", "fig1", "--reward", "20"}).out;
  CHECK(base != rich);
  const auto n1 = csv_column(rich, "n_e1");
  CHECK(n1.size() == 5);
}

TEST_CASE("sweep") {
  const auto r = run({"sweep", "--case", "unobservable", "--param", "p", "--from", "0.1", "--to",
                      "0.5", "--step", "0.1", "--mu-b", "0.9", "--mu-v", "0.5", "--theta", "0.3",
                      "--reward", "4.5", "--cost", "1"});
  CHECK(r.code == 0);
  CHECK(csv_column(r.out, "p").size() == 5);
  const auto missing = run({"sweep", "--case", "unobservable", "--param", "p", "--from", "0.1",
                            "--to", "0.5", "--step", "0.1", "--mu-b", "0.9"});
  CHECK(missing.code == 2);
}

TEST_CASE("validate exit codes and determinism") {
  for (const std::string c : {"observable", "partial", "unobservable"}) {
    const auto a = run({"validate", c, "--seed", "7"});
    INFO(c << "\n" << a.err);
    CHECK(a.code == 0);
    CHECK(a.out == run({"validate", c, "--seed", "7"}).out);
  }
  CHECK(run({"validate", "observable", "--corrupt-event-order"}).code == 1);
  CHECK(run({"validate", "observable", "--slots", "100"}).code == 3);
}

TEST_CASE("seed from the environment") {
  setenv("WVQ_SEED", "42", 1);
  const auto env = run({"validate", "observable", "--slots", "200000"});
  unsetenv("WVQ_SEED");
  const auto flag = run({"validate", "observable", "--slots", "200000", "--seed", "42"});
  const auto other = run({"validate", "observable", "--slots", "200000", "--seed", "43"});
  CHECK(env.out == flag.out);
  CHECK(env.out != other.out);
}

TEST_CASE("config file supplies defaults that flags override") {
  const auto path = std::filesystem::temp_directory_path() / "wvq_test_config.txt";
  {
    std::ofstream f(path);
    f << "# fig1 rates\np=0.5\nmu-b=0.8\nmu-v=0.4\ntheta=0.2\nreward=10\ncost = 1\n";
  }
  const auto r = run({"analyze", "observable", "--config", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("n_e(1)=7\n") != std::string::npos);
  const auto o = run({"analyze", "observable", "--config", path.string(), "--reward", "2"});
  CHECK(o.code == 0);
  CHECK(o.out.find("n_e(1)=7\n") == std::string::npos);
  std::filesystem::remove(path);
  CHECK(run({"analyze", "observable", "--config", path.string()}).code == 2);
}
