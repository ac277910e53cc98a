#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zoneseq/error.hpp"

namespace zoneseq {

using Index = std::size_t;

// Zone sentinel standing for the depot. Only ever used as a start context.
inline constexpr std::string_view depot_zone = "stz";

inline constexpr double earth_radius_m = 6'371'000.0;

struct LatLng {
  double lat{0.0};
  double lng{0.0};

  friend bool operator==(const LatLng&, const LatLng&) = default;
};

// Great-circle distance in meters.
double haversine_m(const LatLng& a, const LatLng& b);

enum class StopKind { Depot, Delivery };

enum class Quality { High, Medium, Low };

std::string_view to_string(Quality q);
Quality parse_quality(std::string_view s);

struct Stop {
  std::string id;
  LatLng pos;
  std::optional<std::string> zone_id;
  StopKind kind{StopKind::Delivery};

  bool is_depot() const { return kind == StopKind::Depot; }
};

// Dense travel-time matrix in seconds; rows and columns follow `ids`.
class TravelTimeMatrix {
public:
  TravelTimeMatrix() = default;
  // Throws ValidationError unless values is ids.size()^2 finite non-negative
  // entries with a zero diagonal.
  TravelTimeMatrix(std::vector<std::string> ids, std::vector<double> values);

  std::size_t size() const { return _ids.size(); }
  const std::vector<std::string>& ids() const { return _ids; }
  const std::vector<double>& values() const { return _values; }

  double at(Index from, Index to) const { return _values[from * size() + to]; }
  double max_entry() const;

private:
  std::vector<std::string> _ids;
  std::vector<double> _values;
};

struct StopSequence {
  std::string route_id;
  std::vector<std::string> stops;

  friend bool operator==(const StopSequence&, const StopSequence&) = default;
};

struct ZoneSequence {
  std::string route_id;
  std::vector<std::string> zones;

  friend bool operator==(const ZoneSequence&, const ZoneSequence&) = default;
};

// A delivery route. Immutable once built; the constructor validates every
// structural invariant and throws ValidationError naming the route.
//
// Stops are stored sorted by id, so Index values are stable for a given stop
// set. When a travel-time matrix is supplied it is re-indexed to that order.
class Route {
public:
  Route(std::string route_id,
        std::vector<Stop> stops,
        std::optional<TravelTimeMatrix> travel_times = std::nullopt,
        std::optional<StopSequence> actual = std::nullopt,
        std::optional<Quality> quality = std::nullopt);

  const std::string& id() const { return _id; }
  std::span<const Stop> stops() const { return _stops; }
  std::size_t size() const { return _stops.size(); }
  const Stop& stop(Index i) const { return _stops[i]; }
  const Stop& stop(std::string_view id) const { return _stops[index_of(id)]; }

  // Throws LookupError naming the id.
  Index index_of(std::string_view stop_id) const;
  bool contains(std::string_view stop_id) const;

  Index depot_index() const { return _depot; }
  const Stop& depot() const { return _stops[_depot]; }

  bool has_travel_times() const { return _travel_times.has_value(); }
  // Matrix in this route's index order.
  const std::optional<TravelTimeMatrix>& travel_times() const {
    return _travel_times;
  }
  const std::optional<StopSequence>& actual() const { return _actual; }
  const std::optional<Quality>& quality() const { return _quality; }

  // Travel-time entry when the route carries a matrix, haversine meters
  // otherwise. The choice is per route, never per edge.
  double distance(Index from, Index to) const;
  double distance(std::string_view from, std::string_view to) const;

  // Sorted distinct zone ids over delivery stops (unzoned stops ignored).
  std::vector<std::string> zones() const;
  // Delivery stop indices of one zone, in index order.
  std::vector<Index> zone_stops(std::string_view zone_id) const;

  // Same route with its actual sequence dropped.
  Route without_actual() const;

private:
  std::string _id;
  std::vector<Stop> _stops;
  std::unordered_map<std::string, Index> _index;
  Index _depot{0};
  std::optional<TravelTimeMatrix> _travel_times;
  std::optional<StopSequence> _actual;
  std::optional<Quality> _quality;
};

// Matrix of haversine meters over the route's stops, in route index order.
// Used wherever a travel-time matrix is required but the route has none.
TravelTimeMatrix haversine_matrix(const Route& route);

} // namespace zoneseq
