#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zoneseq/core.hpp"

namespace zoneseq::tsp {

// Node roles are flags: for the first zone the last-stop node is the depot.
enum class NodeRole : std::uint8_t {
  ZoneStop = 1,
  Representative = 2,
  LastStop = 4,
  Depot = 8,
};

struct TspNode {
  std::uint8_t roles{0};
  // Route stop id; empty for representative nodes.
  std::string stop_id;
  // Zone a representative node stands for; empty otherwise.
  std::string zone_id;
  LatLng pos;

  bool has(NodeRole r) const { return (roles & static_cast<std::uint8_t>(r)) != 0; }
};

// Augmented node set for one zone: the zone's stops, one representative per
// downstream zone, the previous zone's last stop, and the depot.
struct ZoneTspInstance {
  std::vector<TspNode> nodes;
  Index start_index{0};
  Index depot_index{0};
  // Row-major, asymmetric.
  std::vector<double> cost;

  std::size_t size() const { return nodes.size(); }
  double at(Index from, Index to) const { return cost[from * nodes.size() + to]; }
};

// Closed tour as a permutation of node indices.
using TourOrder = std::vector<Index>;

// Component-wise median; even counts average the two middle values.
// Throws ValidationError on an empty span.
LatLng representative_node(std::span<const LatLng> points);

// Instance for zone_order[k]. `prev_last_stop` is the stop the previous zone
// ended on and is ignored for k = 0, where the depot takes that role.
// Edges touching a representative node are haversine meters; all others use
// Route::distance.
ZoneTspInstance build_instance(const Route& route,
                               const ZoneSequence& zone_order,
                               std::size_t k,
                               std::optional<std::string_view> prev_last_stop);

double tour_cost(const ZoneTspInstance& instance, std::span<const Index> tour);

// Greedy construction starting at start_index; ties go to the lower index.
TourOrder nearest_neighbor_tour(const ZoneTspInstance& instance);

struct LocalSearchOptions {
  // Cap on accepted moves plus kicks is budget_per_node * n.
  std::size_t budget_per_node{50};
  // Perturbation restarts: kicks_per_node * n, within the same cap.
  std::size_t kicks_per_node{2};
};

// Nearest-neighbour tour improved by Or-opt (segments of 1-3 nodes) and
// orientation-preserving 3-opt segment exchange, then iterated with random
// segment-exchange kicks. No move reverses a path, so every delta is exact
// under asymmetric costs. Never worse than the nearest-neighbour tour.
// Deterministic given seed.
TourOrder solve_atsp(const ZoneTspInstance& instance,
                     std::uint64_t seed = 0,
                     const LocalSearchOptions& options = {});

// Reads the tour forward from start_index and keeps only zone stops.
std::vector<std::string> order_zone_stops(const ZoneTspInstance& instance,
                                          std::span<const Index> tour);

// Interface for anything that turns an instance into a closed tour.
class AtspSolver {
public:
  virtual ~AtspSolver() = default;
  virtual TourOrder solve(const ZoneTspInstance& instance,
                          std::uint64_t seed) const = 0;
};

class BuiltinSolver final : public AtspSolver {
public:
  explicit BuiltinSolver(LocalSearchOptions options = {}) : _options(options) {}
  TourOrder solve(const ZoneTspInstance& instance,
                  std::uint64_t seed) const override {
    return solve_atsp(instance, seed, _options);
  }

private:
  LocalSearchOptions _options;
};

// Orders every stop of the route zone by zone, threading the last stop of each
// zone into the next instance. Output starts at the depot.
// Throws ValidationError if zone_order is not a permutation of route.zones().
StopSequence sequence_stops(const Route& route,
                            const ZoneSequence& zone_order,
                            const AtspSolver& solver,
                            std::uint64_t seed = 0);

} // namespace zoneseq::tsp
