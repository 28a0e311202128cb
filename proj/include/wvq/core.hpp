#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "wvq/errors.hpp"

namespace wvq {

/// Per-slot probabilities of the Geo/Geo/1 queue with multiple working
/// vacations. Every field lies strictly inside (0, 1).
struct QueueParams {
  double p = 0.0;      ///< arrival probability per slot
  double mu_b = 0.0;   ///< service completion probability, regular busy period
  double mu_v = 0.0;   ///< service completion probability, working vacation
  double theta = 0.0;  ///< vacation termination probability per slot

  bool operator==(const QueueParams&) const = default;
};

/// Linear reward-cost structure: a served customer earns `reward` and pays
/// `cost` per slot spent in the system.
struct EconParams {
  double reward = 0.0;
  double cost = 0.0;

  bool operator==(const EconParams&) const = default;
};

/// A parameter bundle that has passed validate().
struct Model {
  QueueParams queue;
  EconParams econ;

  bool operator==(const Model&) const = default;
};

enum class ServerPhase : std::uint8_t { Vacation = 0, Busy = 1 };

inline constexpr int index_of(ServerPhase phase) noexcept {
  return static_cast<int>(phase);
}

const char* to_string(ServerPhase phase) noexcept;

/// (L+, J): customers in the system just after a slot boundary and the
/// server phase. count == 0 implies phase == Vacation.
struct SystemState {
  int count = 0;
  ServerPhase phase = ServerPhase::Vacation;

  auto operator<=>(const SystemState&) const = default;
  bool operator==(const SystemState&) const = default;
};

bool is_valid(SystemState s) noexcept;
std::string to_string(SystemState s);

QueueParams validate(const QueueParams& params);
EconParams validate(const EconParams& econ);
Model validate(const QueueParams& params, const EconParams& econ);
inline Model validate(const Model& m) { return validate(m.queue, m.econ); }

inline constexpr double complement(double x) noexcept { return 1.0 - x; }

/// p_eff (1 - mu) / ((1 - p_eff) mu); the busy-period load ratio. Values
/// >= 1 mean the regular busy period is not positive recurrent.
double busy_traffic_ratio(double p_eff, double mu);

/// Stability margin used by every closed form that carries (1 - ratio)^-k.
inline constexpr double kStabilityMargin = 1e-12;

}  // namespace wvq
