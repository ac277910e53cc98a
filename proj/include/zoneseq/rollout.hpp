#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zoneseq/core.hpp"
#include "zoneseq/ppm.hpp"

namespace zoneseq::rollout {

// Partial zone sequence after k decisions plus the zones still to place.
struct RolloutState {
  std::vector<std::string> prefix;
  std::set<std::string> remaining;

  std::size_t k() const { return prefix.size(); }
  std::size_t n() const { return prefix.size() + remaining.size(); }
};

RolloutState initial_state(std::span<const std::string> zones);

// Moves `zone` from remaining to the end of prefix. Throws ValidationError if
// the zone is not remaining.
RolloutState apply_action(const RolloutState& state, std::string_view zone);

struct Options {
  ppm::Objective objective{ppm::Objective::Probability};
  // Score lookahead candidates on the OpenMP team. Never changes the result.
  bool parallel{true};
};

struct Counters {
  // Calls to PpmModel::prob.
  std::uint64_t prob_evals{0};
  // Greedy base-policy decisions taken while completing candidates.
  std::uint64_t policy_steps{0};

  Counters& operator+=(const Counters& o) {
    prob_evals += o.prob_evals;
    policy_steps += o.policy_steps;
    return *this;
  }
};

struct CandidateScore {
  std::string zone;
  // g: reward of appending the candidate to the prefix.
  double immediate{0.0};
  // Reward of the greedy completion after the candidate.
  double reward_to_go{0.0};
  // immediate + reward_to_go.
  double lookahead{0.0};
  // Objective of the whole completed sequence, prefix included. This is what
  // candidates are ranked by; it differs from lookahead by a constant.
  double total{0.0};
};

struct Decision {
  std::string zone;
  std::vector<CandidateScore> candidates; // sorted by zone id
  Counters counters;
};

// Base policy: repeatedly appends the remaining zone with the highest
// conditional probability (ties to the smaller zone id). Returns only the
// appended zones.
ZoneSequence greedy_completion(const ppm::PpmModel& model,
                               const RolloutState& state,
                               Counters* counters = nullptr);

// One-step lookahead: argmax over remaining zones of immediate reward plus
// greedy reward-to-go. Throws ValidationError when nothing remains.
std::string next_zone(const ppm::PpmModel& model,
                      const RolloutState& state,
                      const Options& options = {});
Decision next_zone_diagnostics(const ppm::PpmModel& model,
                               const RolloutState& state,
                               const Options& options = {});

// Single-threaded reference for next_zone_diagnostics, kept for testing and
// benchmarking the parallel kernel.
Decision next_zone_serial(const ppm::PpmModel& model,
                          const RolloutState& state,
                          const Options& options = {});

// Runs next_zone from the empty prefix until every zone is placed.
// Throws ValidationError on an empty zone set.
ZoneSequence rollout_sequence(const ppm::PpmModel& model,
                              std::span<const std::string> zones,
                              const Options& options = {},
                              Counters* counters = nullptr);

} // namespace zoneseq::rollout
