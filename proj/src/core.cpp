#include "zoneseq/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace zoneseq {

namespace {

double to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

bool valid(const LatLng& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lng) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lng >= -180.0 && p.lng <= 180.0;
}

} // namespace

double haversine_m(const LatLng& a, const LatLng& b) {
  const double dlat = to_rad(b.lat - a.lat);
  const double dlng = to_rad(b.lng - a.lng);
  const double s_lat = std::sin(dlat / 2.0);
  const double s_lng = std::sin(dlng / 2.0);
  const double h = s_lat * s_lat + std::cos(to_rad(a.lat)) *
                                       std::cos(to_rad(b.lat)) * s_lng * s_lng;
  return 2.0 * earth_radius_m * std::asin(std::sqrt(std::min(1.0, h)));
}

std::string_view to_string(Quality q) {
  switch (q) {
  case Quality::High:
    return "High";
  case Quality::Medium:
    return "Medium";
  case Quality::Low:
    return "Low";
  }
  return "High";
}

Quality parse_quality(std::string_view s) {
  if (s == "High") {
    return Quality::High;
  }
  if (s == "Medium") {
    return Quality::Medium;
  }
  if (s == "Low") {
    return Quality::Low;
  }
  throw ValidationError("unknown route quality '" + std::string(s) + "'");
}

TravelTimeMatrix::TravelTimeMatrix(std::vector<std::string> ids,
                                   std::vector<double> values)
  : _ids(std::move(ids)), _values(std::move(values)) {
  const std::size_t n = _ids.size();
  if (_values.size() != n * n) {
    throw ValidationError("travel-time matrix is not square over its " +
                          std::to_string(n) + " ids");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = _values[i * n + j];
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("travel-time entry " + _ids[i] + " -> " +
                              _ids[j] + " is negative or not finite");
      }
    }
    // Self travel is zero by definition; datasets sometimes omit or garble it.
    _values[i * n + i] = 0.0;
  }
}

double TravelTimeMatrix::max_entry() const {
  double m = 0.0;
  for (const double v : _values) {
    m = std::max(m, v);
  }
  return m;
}

Route::Route(std::string route_id,
             std::vector<Stop> stops,
             std::optional<TravelTimeMatrix> travel_times,
             std::optional<StopSequence> actual,
             std::optional<Quality> quality)
  : _id(std::move(route_id)),
    _stops(std::move(stops)),
    _actual(std::move(actual)),
    _quality(quality) {
  auto fail = [this](const std::string& what) {
    throw ValidationError("route " + _id + ": " + what);
  };

  std::ranges::sort(_stops, {}, &Stop::id);
  std::size_t depots = 0;
  for (Index i = 0; i < _stops.size(); ++i) {
    const Stop& s = _stops[i];
    if (s.id.empty()) {
      fail("empty stop id");
    }
    if (!valid(s.pos)) {
      fail("stop " + s.id + " has invalid coordinates");
    }
    if (!_index.emplace(s.id, i).second) {
      fail("duplicate stop id " + s.id);
    }
    if (s.is_depot()) {
      _depot = i;
      ++depots;
    }
  }
  if (depots != 1) {
    fail("expected exactly one depot, found " + std::to_string(depots));
  }

  if (travel_times) {
    const std::size_t n = _stops.size();
    if (travel_times->size() != n) {
      fail("travel-time matrix covers " + std::to_string(travel_times->size()) +
           " ids but route has " + std::to_string(n) + " stops");
    }
    std::vector<Index> to_route(n);
    for (Index i = 0; i < n; ++i) {
      const auto it = _index.find(travel_times->ids()[i]);
      if (it == _index.end()) {
        fail("travel-time matrix names unknown stop " + travel_times->ids()[i]);
      }
      to_route[i] = it->second;
    }
    std::vector<std::string> ids(n);
    for (Index i = 0; i < n; ++i) {
      ids[i] = _stops[i].id;
    }
    std::vector<double> values(n * n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        values[to_route[i] * n + to_route[j]] = travel_times->at(i, j);
      }
    }
    _travel_times.emplace(std::move(ids), std::move(values));
  }

  if (_actual) {
    if (_actual->route_id.empty()) {
      _actual->route_id = _id;
    }
    if (_actual->stops.size() != _stops.size()) {
      fail("actual sequence has " + std::to_string(_actual->stops.size()) +
           " stops, route has " + std::to_string(_stops.size()));
    }
    std::vector<bool> seen(_stops.size(), false);
    for (const auto& sid : _actual->stops) {
      const auto it = _index.find(sid);
      if (it == _index.end()) {
        fail("actual sequence names unknown stop " + sid);
      }
      if (seen[it->second]) {
        fail("actual sequence repeats stop " + sid);
      }
      seen[it->second] = true;
    }
    if (_actual->stops.front() != depot().id) {
      fail("actual sequence does not start at the depot");
    }
  }
}

Index Route::index_of(std::string_view stop_id) const {
  const auto it = _index.find(std::string(stop_id));
  if (it == _index.end()) {
    throw LookupError("route " + _id + ": unknown stop id " +
                      std::string(stop_id));
  }
  return it->second;
}

bool Route::contains(std::string_view stop_id) const {
  return _index.contains(std::string(stop_id));
}

double Route::distance(Index from, Index to) const {
  if (_travel_times) {
    return _travel_times->at(from, to);
  }
  return haversine_m(_stops[from].pos, _stops[to].pos);
}

double Route::distance(std::string_view from, std::string_view to) const {
  return distance(index_of(from), index_of(to));
}

std::vector<std::string> Route::zones() const {
  std::vector<std::string> out;
  for (const Stop& s : _stops) {
    if (!s.is_depot() && s.zone_id) {
      out.push_back(*s.zone_id);
    }
  }
  std::ranges::sort(out);
  const auto dup = std::ranges::unique(out);
  out.erase(dup.begin(), dup.end());
  return out;
}

std::vector<Index> Route::zone_stops(std::string_view zone_id) const {
  std::vector<Index> out;
  for (Index i = 0; i < _stops.size(); ++i) {
    const Stop& s = _stops[i];
    if (!s.is_depot() && s.zone_id && *s.zone_id == zone_id) {
      out.push_back(i);
    }
  }
  return out;
}

Route Route::without_actual() const {
  return Route(_id, _stops, _travel_times, std::nullopt, _quality);
}

TravelTimeMatrix haversine_matrix(const Route& route) {
  const std::size_t n = route.size();
  std::vector<std::string> ids(n);
  std::vector<double> values(n * n);
  for (Index i = 0; i < n; ++i) {
    ids[i] = route.stop(i).id;
    for (Index j = 0; j < n; ++j) {
      values[i * n + j] = haversine_m(route.stop(i).pos, route.stop(j).pos);
    }
  }
  return TravelTimeMatrix(std::move(ids), std::move(values));
}

} // namespace zoneseq
