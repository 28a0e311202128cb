#pragma once

// Finite Markov chains over (L+, J) built from the one-slot dynamics, and a
// dense stationary solver.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wvq/core.hpp"

namespace wvq {

/// Row-stochastic matrix over an explicit, sorted list of states.
struct TransitionMatrix {
  std::vector<SystemState> states;
  Eigen::MatrixXd p;

  /// Position of s in `states`, or -1.
  int index_of(SystemState s) const;
  double at(SystemState from, SystemState to) const;
};

/// Probability that an arrival observing `s` joins.
using JoinRule = std::function<double(SystemState)>;

/// Calls emit(next, prob) for every one-slot transition out of `from`:
/// arrival (joins with probability join), then a completion for the
/// pre-arrival head at the rate of the current phase, then the vacation
/// termination draw which only switches to Busy if customers remain.
template <class Emit>
void for_each_transition(SystemState from, const QueueParams& q, double join,
                         Emit&& emit) {
  const double arrive = q.p * join;
  const double mu =
      from.phase == ServerPhase::Busy ? q.mu_b : q.mu_v;
  for (int a = 0; a <= 1; ++a) {
    const double pa = a ? arrive : 1.0 - arrive;
    if (pa == 0.0) continue;
    for (int d = 0; d <= (from.count >= 1 ? 1 : 0); ++d) {
      const double pd = from.count >= 1 ? (d ? mu : 1.0 - mu) : 1.0;
      if (pd == 0.0) continue;
      const int next = from.count + a - d;
      if (from.phase == ServerPhase::Busy) {
        emit(SystemState{next, next >= 1 ? ServerPhase::Busy
                                         : ServerPhase::Vacation},
             pa * pd);
      } else if (next == 0) {
        emit(SystemState{0, ServerPhase::Vacation}, pa * pd);
      } else {
        emit(SystemState{next, ServerPhase::Vacation}, pa * pd * (1.0 - q.theta));
        emit(SystemState{next, ServerPhase::Busy}, pa * pd * q.theta);
      }
    }
  }
}

/// Chain of the states reachable from (0,0) when arrivals observing s join
/// with probability join(s). Arrivals are refused at count >= max_count.
TransitionMatrix build_chain(const QueueParams& q, const JoinRule& join,
                             int max_count);

/// Unique stationary row vector of a row-stochastic matrix, from the balance
/// equations with one equation replaced by normalization.
/// Throws SingularSystem when the solution is not unique.
Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& p);

/// max_j |(pi P - pi)_j|
double stationary_residual(const Eigen::MatrixXd& p, const Eigen::VectorXd& pi);

}  // namespace wvq
