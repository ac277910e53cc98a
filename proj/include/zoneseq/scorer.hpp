#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zoneseq/core.hpp"
#include "zoneseq/ingest.hpp"

namespace zoneseq::scorer {

// Adjacency deviation of `submitted` from `actual`, both orderings of the same
// delivery stops (depot excluded). With r_i the submitted position of the
// i-th actual stop: SD = 2 / (n (n - 1)) * sum_{i>=1} (|r_i - r_{i-1}| - 1).
// Zero for n < 2. Throws ValidationError when the stop sets differ.
double sequence_deviation(std::span<const std::string> actual,
                          std::span<const std::string> submitted);

struct ErpResult {
  double cost{0.0};
  std::size_t edits{0};

  friend bool operator==(const ErpResult&, const ErpResult&) = default;
};

// Edit distance with real penalty over travel times scaled by the matrix
// maximum. Substituting a for b costs t(a, b); a gap on x costs t(x, gap_ref).
// `edits` counts non-zero-cost operations on the optimal path chosen with
// ties resolved as match, then deletion, then insertion.
// Throws ValidationError if `matrix` is null.
ErpResult erp(std::span<const std::string> actual,
              std::span<const std::string> submitted,
              const TravelTimeMatrix* matrix,
              std::string_view gap_ref);

struct RouteScore {
  std::string route_id;
  double sd{0.0};
  double erp_cost{0.0};
  std::size_t erp_edits{0};
  double score{0.0};
};

// sd * erp_cost / erp_edits, or 0 when there are no edits.
double combine(double sd, const ErpResult& e);

struct ScoreOptions {
  // Score routes without a travel-time matrix on haversine meters instead of
  // failing.
  bool haversine_fallback{false};
};

// Pluggable so that a port of another evaluator can replace the default
// formula without touching callers.
class RouteScorer {
public:
  virtual ~RouteScorer() = default;
  virtual RouteScore score(const Route& route,
                           const StopSequence& submitted) const = 0;
};

// Sequence deviation times ERP per edit, gap reference at the depot.
class SdErpScorer final : public RouteScorer {
public:
  explicit SdErpScorer(ScoreOptions options = {}) : _options(options) {}
  RouteScore score(const Route& route,
                   const StopSequence& submitted) const override;

private:
  ScoreOptions _options;
};

// Convenience wrapper around SdErpScorer.
RouteScore route_score(const Route& route,
                       const StopSequence& submitted,
                       const ScoreOptions& options = {});

// route id -> submitted stop ids
using Submission = std::map<std::string, std::vector<std::string>>;

struct ScoreReport {
  std::vector<RouteScore> routes; // route id order
  double mean_score{0.0};
};

// Scores every route that has an actual sequence. Throws ValidationError
// naming the first route without a submission.
ScoreReport dataset_score(const Dataset& dataset,
                          const Submission& submission,
                          const RouteScorer& scorer);
// Single-threaded reference.
ScoreReport dataset_score_serial(const Dataset& dataset,
                                 const Submission& submission,
                                 const RouteScorer& scorer);

Submission read_submission(const std::filesystem::path& path);
std::string submission_json(const Submission& submission);
std::string report_json(const ScoreReport& report);

} // namespace zoneseq::scorer
