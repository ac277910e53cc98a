#include "zoneseq/rollout.hpp"

#include <algorithm>

#include "zoneseq/parallel.hpp"

namespace zoneseq::rollout {

using ppm::EncodedZone;
using ppm::PpmModel;

namespace {

// Encoded view of a rollout state. `context` always starts with the depot
// sentinel followed by the prefix; `remaining` is in zone id order.
struct Problem {
  const PpmModel* model{nullptr};
  ppm::Objective objective{ppm::Objective::Probability};
  std::vector<EncodedZone> context;
  std::vector<std::string> names;
  std::vector<EncodedZone> codes;
  double prefix_reward{0.0};
};

Problem make_problem(const PpmModel& model,
                     const RolloutState& state,
                     ppm::Objective objective) {
  Problem p;
  p.model = &model;
  p.objective = objective;
  p.context.reserve(state.n() + 1);
  p.context.push_back(model.encode(depot_zone));
  for (const auto& z : state.prefix) {
    const EncodedZone enc = model.encode(z);
    p.prefix_reward += ppm::reward(model.prob(p.context, enc), objective);
    p.context.push_back(enc);
  }
  for (const auto& z : state.remaining) {
    p.names.push_back(z);
    p.codes.push_back(model.encode(z));
  }
  return p;
}

// Greedy completion of `context` over `pool` (indices into codes, sorted by
// zone id). Appends picks to `order`; returns the reward accumulated on top
// of `acc`, summing left to right so equal sequences give equal bits.
double greedy(const Problem& p,
              std::vector<EncodedZone>& context,
              std::vector<std::size_t>& pool,
              std::vector<std::size_t>* order,
              std::vector<double>* step_rewards,
              double acc,
              Counters& counters) {
  while (!pool.empty()) {
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double q = p.model->prob(context, p.codes[pool[i]]);
      if (q > best_p) {
        best_p = q;
        best = i;
      }
    }
    counters.prob_evals += pool.size();
    ++counters.policy_steps;
    const double r = ppm::reward(best_p, p.objective);
    acc += r;
    if (step_rewards != nullptr) {
      step_rewards->push_back(r);
    }
    context.push_back(p.codes[pool[best]]);
    if (order != nullptr) {
      order->push_back(pool[best]);
    }
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return acc;
}

CandidateScore evaluate_candidate(const Problem& p,
                                  std::size_t candidate,
                                  Counters& counters) {
  std::vector<EncodedZone> context = p.context;
  std::vector<std::size_t> pool;
  pool.reserve(p.codes.size());
  for (std::size_t i = 0; i < p.codes.size(); ++i) {
    if (i != candidate) {
      pool.push_back(i);
    }
  }
  CandidateScore s;
  s.zone = p.names[candidate];
  s.immediate = ppm::reward(p.model->prob(context, p.codes[candidate]),
                            p.objective);
  ++counters.prob_evals;
  context.push_back(p.codes[candidate]);

  // Window of each completion step reaches back across the candidate into the
  // prefix, so total is the plain objective of the full sequence.
  std::vector<double> steps;
  steps.reserve(pool.size());
  s.total = greedy(p, context, pool, nullptr, &steps,
                   p.prefix_reward + s.immediate, counters);
  for (const double r : steps) {
    s.reward_to_go += r;
  }
  s.lookahead = s.immediate + s.reward_to_go;
  return s;
}

Decision decide(const Problem& p, bool parallel) {
  const std::size_t m = p.codes.size();
  if (m == 0) {
    throw ValidationError("rollout: no zones remain to choose from");
  }
  Decision d;
  d.candidates.resize(m);
  std::vector<Counters> counters(m);
  if (parallel && m > 1) {
    parallel_for(m, [&](std::size_t i) {
      d.candidates[i] = evaluate_candidate(p, i, counters[i]);
    });
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      d.candidates[i] = evaluate_candidate(p, i, counters[i]);
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < m; ++i) {
    d.counters += counters[i];
    if (d.candidates[i].total > d.candidates[best].total) {
      best = i;
    }
  }
  d.zone = d.candidates[best].zone;
  return d;
}

} // namespace

RolloutState initial_state(std::span<const std::string> zones) {
  RolloutState s;
  s.remaining.insert(zones.begin(), zones.end());
  return s;
}

RolloutState apply_action(const RolloutState& state, std::string_view zone) {
  RolloutState next = state;
  const auto it = next.remaining.find(std::string(zone));
  if (it == next.remaining.end()) {
    throw ValidationError("rollout: zone " + std::string(zone) +
                          " is not among the remaining zones");
  }
  next.prefix.push_back(*it);
  next.remaining.erase(it);
  return next;
}

ZoneSequence greedy_completion(const PpmModel& model,
                               const RolloutState& state,
                               Counters* counters) {
  Problem p = make_problem(model, state, ppm::Objective::Probability);
  std::vector<std::size_t> pool(p.codes.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    pool[i] = i;
  }
  std::vector<std::size_t> order;
  Counters local;
  greedy(p, p.context, pool, &order, nullptr, 0.0, local);
  if (counters != nullptr) {
    *counters += local;
  }
  ZoneSequence out;
  for (const std::size_t i : order) {
    out.zones.push_back(p.names[i]);
  }
  return out;
}

std::string next_zone(const PpmModel& model,
                      const RolloutState& state,
                      const Options& options) {
  return next_zone_diagnostics(model, state, options).zone;
}

Decision next_zone_diagnostics(const PpmModel& model,
                               const RolloutState& state,
                               const Options& options) {
  return decide(make_problem(model, state, options.objective), options.parallel);
}

Decision next_zone_serial(const PpmModel& model,
                          const RolloutState& state,
                          const Options& options) {
  return decide(make_problem(model, state, options.objective), false);
}

ZoneSequence rollout_sequence(const PpmModel& model,
                              std::span<const std::string> zones,
                              const Options& options,
                              Counters* counters) {
  if (zones.empty()) {
    throw ValidationError("rollout: empty zone set");
  }
  Problem p = make_problem(model, initial_state(zones), options.objective);
  ZoneSequence out;
  out.zones.reserve(p.codes.size());
  Counters total;
  while (!p.codes.empty()) {
    const Decision d = decide(p, options.parallel);
    total += d.counters;
    const auto pick = static_cast<std::size_t>(
      std::ranges::find(p.names, d.zone) - p.names.begin());
    // Same float operation the candidate total started from.
    p.prefix_reward += d.candidates[pick].immediate;
    p.context.push_back(p.codes[pick]);
    out.zones.push_back(d.zone);
    p.names.erase(p.names.begin() + static_cast<std::ptrdiff_t>(pick));
    p.codes.erase(p.codes.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  if (counters != nullptr) {
    *counters += total;
  }
  return out;
}

} // namespace zoneseq::rollout
