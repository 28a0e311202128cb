#include "wvq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <type_traits>

namespace wvq::sim {

namespace {

std::size_t state_index(SystemState s) {
  return 2 * static_cast<std::size_t>(s.count) + static_cast<std::size_t>(index_of(s.phase));
}

SystemState state_at(std::size_t idx) {
  return {static_cast<int>(idx / 2), idx % 2 ? ServerPhase::Busy : ServerPhase::Vacation};
}

// Batch-means accumulator for a ratio of sums.
struct Ratio {
  std::vector<double> sum;
  std::vector<double> n;

  explicit Ratio(int batches) : sum(batches, 0.0), n(batches, 0.0) {}

  void add(std::size_t b, double x, double weight = 1.0) {
    sum[b] += x;
    n[b] += weight;
  }

  Estimate finish() const {
    Estimate e;
    double s = 0.0, total = 0.0;
    for (std::size_t b = 0; b < sum.size(); ++b) {
      s += sum[b];
      total += n[b];
    }
    e.samples = static_cast<std::uint64_t>(total);
    if (total <= 0.0) {
      e.std_error = std::numeric_limits<double>::infinity();
      return e;
    }
    e.value = s / total;
    const double k = static_cast<double>(sum.size());
    const double nbar = total / k;
    double acc = 0.0;
    for (std::size_t b = 0; b < sum.size(); ++b) {
      const double d = (sum[b] - e.value * n[b]) / nbar;
      acc += d * d;
    }
    e.std_error = std::sqrt(acc / (k * (k - 1.0)));
    return e;
  }
};

struct Customer {
  std::uint64_t epoch;
  SystemState seen;
  bool tagged;
};

// 53-bit uniform on [0, 1).
double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Service rates may be 1 here: deterministic service is well defined slot
// by slot even though the analytic modules need rates below 1.
Model validate_for_simulation(const Model& model) {
  Model probe = model;
  for (double* mu : {&probe.queue.mu_b, &probe.queue.mu_v})
    if (*mu == 1.0) *mu = 0.5;
  validate(probe);
  return model;
}

}  // namespace

double join_probability(const Strategy& strategy, SystemState s) {
  return std::visit(
      [s](const auto& st) -> double {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, observable::ThresholdPair>)
          return st.joins(s) ? 1.0 : 0.0;
        else if constexpr (std::is_same_v<T, partial::MixedPair>)
          return s.phase == ServerPhase::Busy ? st.q1 : st.q0;
        else
          return st.q;
      },
      strategy);
}

void validate(const Strategy& strategy) {
  if (const auto* t = std::get_if<observable::ThresholdPair>(&strategy)) {
    if (t->n0 < -1) throw InvalidParameter("n0", t->n0);
    if (t->n1 < -1) throw InvalidParameter("n1", t->n1);
  } else if (const auto* m = std::get_if<partial::MixedPair>(&strategy)) {
    partial::validate(*m);
  } else {
    const double q = std::get<Blind>(strategy).q;
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("q", q);
  }
}

SimResult simulate(const Model& model, const Strategy& strategy, const SimConfig& config) {
  const Model m = validate_for_simulation(model);
  validate(strategy);
  if (config.slots <= config.warmup)
    throw InvalidParameter("slots", static_cast<double>(config.slots));
  if (config.batches < 2) throw InvalidParameter("batches", config.batches);

  const QueueParams& q = m.queue;
  const auto batches = static_cast<std::size_t>(config.batches);
  const std::uint64_t recorded = config.slots - config.warmup;
  auto batch_of = [&](std::uint64_t epoch) {
    return std::min<std::size_t>(
        batches - 1, static_cast<std::size_t>((epoch - config.warmup - 1) * batches / recorded));
  };

  std::mt19937_64 rng(config.seed);
  std::deque<Customer> queue;
  SystemState state{0, ServerPhase::Vacation};

  std::vector<std::vector<std::uint64_t>> visits;  // [state][batch]
  std::vector<std::array<std::uint64_t, 6>> moves;  // [from][(delta + 1) * 2 + phase]
  std::vector<Ratio> by_state;
  auto grow = [&](std::size_t idx) {
    if (idx >= visits.size()) {
      visits.resize(idx + 1, std::vector<std::uint64_t>(batches, 0));
      moves.resize(idx + 1, std::array<std::uint64_t, 6>{});
      by_state.resize(idx + 1, Ratio(config.batches));
    }
  };

  Ratio overall(config.batches), benefit(config.batches), count(config.batches);
  std::array<Ratio, 2> by_phase{Ratio(config.batches), Ratio(config.batches)};
  Ratio tagged(config.batches), balk(config.batches);

  SimResult out;
  out.min_sojourn = std::numeric_limits<std::uint64_t>::max();

  for (std::uint64_t n = 1; n <= config.slots; ++n) {
    const bool record = n > config.warmup;
    const std::size_t b = record ? batch_of(n) : 0;
    const SystemState snap = state;
    const double u_arrive = uniform(rng);
    const double u_serve = uniform(rng);
    const double u_vacation = uniform(rng);

    // 1-2: arrival observes the snapshot.
    int joined = 0;
    if (u_arrive < q.p) {
      const bool tag = config.tagged_state && *config.tagged_state == snap;
      const double j = tag ? 1.0 : join_probability(strategy, snap);
      if (u_arrive < q.p * j) {
        joined = 1;
        queue.push_back({n, snap, tag});
        ++out.total_joins;
      } else if (record) {
        ++out.balks;
      }
      if (record) {
        ++out.potential_arrivals;
        balk.add(b, joined ? 0.0 : 1.0);
      }
    }

    // 3: completion for the head present before the arrival.
    const int serve_count = config.corrupt_event_order ? snap.count + joined : snap.count;
    const double mu = snap.phase == ServerPhase::Busy ? q.mu_b : q.mu_v;
    int departed = 0;
    if (serve_count >= 1 && u_serve < mu) {
      departed = 1;
      const Customer c = queue.front();
      queue.pop_front();
      ++out.total_departures;
      const std::uint64_t w = n - c.epoch;
      out.min_sojourn = std::min(out.min_sojourn, w);
      if (c.epoch > config.warmup) {
        const std::size_t cb = batch_of(c.epoch);
        const double x = static_cast<double>(w);
        overall.add(cb, x);
        by_phase[index_of(c.seen.phase)].add(cb, x);
        const std::size_t si = state_index(c.seen);
        grow(si);
        by_state[si].add(cb, x);
        if (c.tagged) tagged.add(cb, x);
      }
    }

    // 4: vacation end takes effect only with customers present.
    const int next = snap.count + joined - departed;
    ServerPhase phase = snap.phase;
    if (phase == ServerPhase::Vacation) {
      if (u_vacation < q.theta && next >= 1) phase = ServerPhase::Busy;
    } else if (next == 0) {
      phase = ServerPhase::Vacation;
    }
    state = {next, phase};
    if (next == 0 && phase == ServerPhase::Busy) out.phase_consistent = false;

    // 5: statistics at the n+ epoch.
    if (record) {
      const std::size_t from = state_index(snap), to = state_index(state);
      grow(std::max(from, to));
      ++visits[to][b];
      ++moves[from][static_cast<std::size_t>((next - snap.count + 1) * 2 + index_of(phase))];
      benefit.add(b, m.econ.reward * departed - m.econ.cost * next);
      count.add(b, next);
    }
  }

  out.recorded_slots = recorded;
  out.in_system_at_end = queue.size();
  if (out.total_departures == 0) out.min_sojourn = 0;

  const double per_batch = static_cast<double>(recorded) / static_cast<double>(batches);
  for (std::size_t i = 0; i < visits.size(); ++i) {
    std::uint64_t total = 0;
    for (auto v : visits[i]) total += v;
    if (total == 0) continue;
    const SystemState s = state_at(i);
    Ratio freq(config.batches);
    for (std::size_t k = 0; k < batches; ++k)
      freq.add(k, static_cast<double>(visits[i][k]), per_batch);
    const Estimate e = freq.finish();
    out.empirical_dist[s] = static_cast<double>(total) / static_cast<double>(recorded);
    out.empirical_dist_se[s] = e.std_error;
  }
  for (std::size_t i = 0; i < moves.size(); ++i) {
    const SystemState from = state_at(i);
    for (std::size_t k = 0; k < 6; ++k) {
      if (moves[i][k] == 0) continue;
      const SystemState to{from.count + static_cast<int>(k / 2) - 1,
                           k % 2 ? ServerPhase::Busy : ServerPhase::Vacation};
      out.transition_counts[{from, to}] = moves[i][k];
    }
  }
  for (std::size_t i = 0; i < by_state.size(); ++i) {
    const Estimate e = by_state[i].finish();
    if (e.samples > 0) out.mean_sojourn_by_join_state[state_at(i)] = e;
  }

  out.mean_sojourn_overall = overall.finish();
  out.mean_sojourn_by_join_phase = {by_phase[0].finish(), by_phase[1].finish()};
  if (config.tagged_state) out.tagged = tagged.finish();
  out.balk_rate = out.potential_arrivals
                      ? static_cast<double>(out.balks) / static_cast<double>(out.potential_arrivals)
                      : 0.0;
  out.balk = balk.finish();
  out.social_benefit_rate = benefit.finish();
  out.mean_count = count.finish();
  return out;
}

TransitionReport transition_frequency_check(const SimResult& result,
                                            const TransitionMatrix& matrix,
                                            std::uint64_t min_visits, double z_limit) {
  std::map<SystemState, std::map<SystemState, std::uint64_t>> rows;
  for (const auto& [key, c] : result.transition_counts) rows[key.first][key.second] += c;

  TransitionReport report;
  for (const auto& [from, row] : rows) {
    std::uint64_t visits = 0;
    for (const auto& [to, c] : row) visits += c;
    if (visits < min_visits) continue;
    ++report.states_checked;

    const int i = matrix.index_of(from);
    std::map<SystemState, std::uint64_t> cells = row;
    if (i >= 0) {
      for (std::size_t j = 0; j < matrix.states.size(); ++j)
        if (matrix.p(i, static_cast<Eigen::Index>(j)) > 0.0) cells.try_emplace(matrix.states[j], 0);
    }
    const double nv = static_cast<double>(visits);
    for (const auto& [to, c] : cells) {
      ++report.cells_checked;
      const double expected = i >= 0 ? matrix.at(from, to) : 0.0;
      const double empirical = static_cast<double>(c) / nv;
      const double se = std::sqrt(expected * (1.0 - expected) / nv);
      double z;
      if (se > 0.0)
        z = (empirical - expected) / se;
      else
        z = empirical == expected ? 0.0 : std::numeric_limits<double>::infinity();
      if (std::abs(z) > z_limit) report.violations.push_back({from, to, empirical, expected, z});
    }
  }
  return report;
}

Estimate tagged_sojourn(const Model& m, const SimConfig& config, const Strategy& strategy) {
  if (!config.tagged_state) throw InvalidParameter("tagged_state", 0.0);
  const SimResult r = simulate(m, strategy, config);
  if (!r.tagged || r.tagged->samples < 100)
    throw InsufficientSamples("fewer than 100 tagged customers at " +
                              to_string(*config.tagged_state));
  return *r.tagged;
}

}  // namespace wvq::sim
