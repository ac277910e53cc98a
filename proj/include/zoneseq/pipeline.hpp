#pragma once

#include <cstdint>
#include <vector>

#include "zoneseq/ingest.hpp"
#include "zoneseq/ppm.hpp"
#include "zoneseq/rollout.hpp"
#include "zoneseq/scorer.hpp"
#include "zoneseq/tsp.hpp"

namespace zoneseq {

// How the zone order of a route is produced before stops are sorted.
enum class ZonePolicy {
  Rollout,      // learned model + one-step lookahead
  Alphabetical, // zone ids sorted
  GroundTruth,  // ZSgt of the route's own actual sequence
};

std::string_view to_string(ZonePolicy p);

struct SequenceOptions {
  ZonePolicy policy{ZonePolicy::Rollout};
  rollout::Options rollout;
  // Built-in local search when null.
  const tsp::AtspSolver* solver{nullptr};
  std::uint64_t seed{42};
};

struct RouteResult {
  StopSequence stops;
  ZoneSequence zones;
  double zone_ms{0.0};
  double stop_ms{0.0};
};

// Zone derivation, zone ordering, per-zone ATSP and join for one route.
// `model` may be null unless policy is Rollout.
RouteResult sequence_route(const Route& route,
                           const ppm::PpmModel* model,
                           const SequenceOptions& options);

// One result per route in dataset order, routes solved on the OpenMP team.
std::vector<RouteResult> sequence_dataset(const Dataset& dataset,
                                          const ppm::PpmModel* model,
                                          const SequenceOptions& options);
// Single-threaded reference.
std::vector<RouteResult> sequence_dataset_serial(const Dataset& dataset,
                                                 const ppm::PpmModel* model,
                                                 const SequenceOptions& options);

scorer::Submission to_submission(const std::vector<RouteResult>& results);

} // namespace zoneseq
