#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zoneseq/core.hpp"

namespace zoneseq {

enum class Split { Train, Eval };

struct Dataset {
  Split split{Split::Train};
  // Sorted by route id, ids unique.
  std::vector<Route> routes;

  // Throws LookupError.
  const Route& route(std::string_view route_id) const;
  // Sorts routes and rejects duplicate ids.
  void normalize();
};

// Maximal run of consecutive stops sharing a zone in an actual sequence.
struct ZoneRun {
  std::string zone_id;
  std::size_t stop_count{0};
  // Position of the run's first stop in the actual sequence (depot is 0).
  std::size_t first_position{0};

  friend bool operator==(const ZoneRun&, const ZoneRun&) = default;
};

// Reads routes.json plus the optional actual_sequences.json, travel_times.json
// and quality.json from `dir`. Missing zone ids are imputed.
//
// Throws IoError when routes.json is missing or unreadable, ValidationError
// (naming the route) for malformed content.
Dataset load_dataset(const std::filesystem::path& dir, Split split = Split::Train);

// Writes the same layout load_dataset reads. Optional files are only written
// when at least one route carries the corresponding data.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Zone of the nearest zoned delivery stop (by Route::distance from `stop`),
// ties to the smaller stop id. Throws ValidationError if no stop is zoned.
std::string impute_zone(const Route& route, Index stop);

// Copy of `route` with every unzoned delivery stop assigned by impute_zone.
// Imputation only looks at stops that were zoned on input.
Route impute_missing_zones(const Route& route);

// Depot excluded. `actual` must be a valid actual sequence of `route`.
std::vector<ZoneRun> zone_runs(const Route& route, const StopSequence& actual);

// Keeps, for every zone, its run with the most stops (earliest on ties) and
// orders zones by the position of the kept runs.
ZoneSequence collapse_to_zsgt(std::span<const ZoneRun> runs,
                              std::string route_id = {});

// zone_runs + collapse_to_zsgt on the route's own actual sequence.
ZoneSequence ground_truth_zones(const Route& route);

// ZSgt of every route with an actual sequence, in route order. Low quality
// routes are skipped unless include_low is set.
std::vector<ZoneSequence> training_corpus(const Dataset& dataset,
                                          bool include_low = false);

} // namespace zoneseq
