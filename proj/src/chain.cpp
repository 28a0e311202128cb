#include "wvq/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

namespace wvq {

int TransitionMatrix::index_of(SystemState s) const {
  auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || *it != s) return -1;
  return static_cast<int>(it - states.begin());
}

double TransitionMatrix::at(SystemState from, SystemState to) const {
  const int i = index_of(from), j = index_of(to);
  if (i < 0 || j < 0) return 0.0;
  return p(i, j);
}

TransitionMatrix build_chain(const QueueParams& q, const JoinRule& join,
                             int max_count) {
  const SystemState origin{0, ServerPhase::Vacation};
  std::set<SystemState> seen{origin};
  std::deque<SystemState> frontier{origin};
  std::map<SystemState, std::map<SystemState, double>> rows;

  while (!frontier.empty()) {
    const SystemState s = frontier.front();
    frontier.pop_front();
    const double j = s.count >= max_count ? 0.0 : join(s);
    auto& row = rows[s];
    for_each_transition(s, q, j, [&](SystemState next, double prob) {
      if (prob == 0.0) return;
      row[next] += prob;
      if (seen.insert(next).second) frontier.push_back(next);
    });
  }

  TransitionMatrix out;
  out.states.assign(seen.begin(), seen.end());
  const auto n = static_cast<Eigen::Index>(out.states.size());
  out.p = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [from, row] : rows) {
    const int i = out.index_of(from);
    for (const auto& [to, prob] : row) out.p(i, out.index_of(to)) += prob;
  }
  return out;
}

Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  if (n == 0 || p.cols() != n) throw SingularSystem("matrix must be square and non-empty");
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw SingularSystem("chain is reducible");
  Eigen::VectorXd pi = lu.solve(b);
  if (!pi.allFinite() || (a * pi - b).cwiseAbs().maxCoeff() > 1e-8)
    throw SingularSystem("balance equations have no unique solution");
  return pi;
}

double stationary_residual(const Eigen::MatrixXd& p, const Eigen::VectorXd& pi) {
  Eigen::RowVectorXd r = pi.transpose() * p - pi.transpose();
  return r.cwiseAbs().maxCoeff();
}

}  // namespace wvq
