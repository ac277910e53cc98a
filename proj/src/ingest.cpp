#include "zoneseq/ingest.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include <json.hpp>

#include "zoneseq/io.hpp"
#include "zoneseq/parallel.hpp"

namespace zoneseq {

using nlohmann::json;

namespace {

constexpr std::string_view default_depot_id = "depot";

json parse_json_file(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " +
                          e.what());
  }
}

std::optional<json> parse_optional(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    return std::nullopt;
  }
  return parse_json_file(path);
}

void require_object(const json& j, const std::string& what) {
  if (!j.is_object()) {
    throw ValidationError(what + " must be a JSON object");
  }
}

double number_field(const json& obj,
                    const char* key,
                    const std::string& route_id,
                    const std::string& what) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ValidationError("route " + route_id + ": " + what + " lacks numeric '" +
                          key + "'");
  }
  return it->get<double>();
}

std::vector<Stop> parse_stops(const std::string& route_id, const json& route) {
  require_object(route, "route " + route_id);
  std::vector<Stop> stops;

  const auto stops_it = route.find("stops");
  if (stops_it == route.end()) {
    throw ValidationError("route " + route_id + ": missing 'stops'");
  }
  require_object(*stops_it, "route " + route_id + " stops");
  for (const auto& [sid, s] : stops_it->items()) {
    require_object(s, "route " + route_id + " stop " + sid);
    Stop stop;
    stop.id = sid;
    stop.pos = {number_field(s, "lat", route_id, "stop " + sid),
                number_field(s, "lng", route_id, "stop " + sid)};
    // Challenge-style layout marks the depot as a "Station" stop.
    const auto type = s.find("type");
    if (type != s.end() && type->is_string() &&
        type->get<std::string>() == "Station") {
      stop.kind = StopKind::Depot;
    }
    const auto zone = s.find("zone_id");
    if (!stop.is_depot() && zone != s.end() && zone->is_string() &&
        !zone->get<std::string>().empty()) {
      stop.zone_id = zone->get<std::string>();
    }
    stops.push_back(std::move(stop));
  }

  const auto depot_it = route.find("depot");
  if (depot_it != route.end()) {
    require_object(*depot_it, "route " + route_id + " depot");
    Stop depot;
    const auto id = depot_it->find("id");
    depot.id = (id != depot_it->end() && id->is_string())
                   ? id->get<std::string>()
                   : std::string(default_depot_id);
    depot.pos = {number_field(*depot_it, "lat", route_id, "depot"),
                 number_field(*depot_it, "lng", route_id, "depot")};
    depot.kind = StopKind::Depot;
    stops.push_back(std::move(depot));
  }
  return stops;
}

StopSequence parse_actual(const std::string& route_id, const json& j) {
  const json* positions = &j;
  if (j.is_object() && j.contains("actual") && j.at("actual").is_object()) {
    positions = &j.at("actual");
  }
  require_object(*positions, "actual sequence of route " + route_id);
  std::vector<std::pair<long long, std::string>> order;
  for (const auto& [sid, pos] : positions->items()) {
    if (!pos.is_number_integer()) {
      throw ValidationError("route " + route_id + ": actual position of stop " +
                            sid + " is not an integer");
    }
    order.emplace_back(pos.get<long long>(), sid);
  }
  std::ranges::sort(order);
  StopSequence seq{route_id, {}};
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i].first != static_cast<long long>(i)) {
      throw ValidationError("route " + route_id +
                            ": actual positions are not a permutation of 0.." +
                            std::to_string(order.size() - 1));
    }
    seq.stops.push_back(order[i].second);
  }
  return seq;
}

TravelTimeMatrix parse_travel_times(const std::string& route_id,
                                    const json& j,
                                    const std::vector<Stop>& stops) {
  require_object(j, "travel times of route " + route_id);
  std::vector<std::string> ids;
  ids.reserve(stops.size());
  for (const Stop& s : stops) {
    ids.push_back(s.id);
  }
  std::ranges::sort(ids);
  const std::size_t n = ids.size();
  auto non_square = [&] {
    return ValidationError("route " + route_id +
                           ": travel-time matrix is not square over the " +
                           std::to_string(n) + " route stops");
  };
  if (j.size() != n) {
    throw non_square();
  }
  std::vector<double> values(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto row = j.find(ids[a]);
    if (row == j.end() || !row->is_object() || row->size() != n) {
      throw non_square();
    }
    for (std::size_t b = 0; b < n; ++b) {
      const auto cell = row->find(ids[b]);
      if (cell == row->end() || !cell->is_number()) {
        throw non_square();
      }
      values[a * n + b] = cell->get<double>();
    }
  }
  try {
    return TravelTimeMatrix(std::move(ids), std::move(values));
  } catch (const ValidationError& e) {
    throw ValidationError("route " + route_id + ": " + e.what());
  }
}

} // namespace

const Route& Dataset::route(std::string_view route_id) const {
  const auto it = std::ranges::lower_bound(routes, route_id, {}, &Route::id);
  if (it == routes.end() || it->id() != route_id) {
    throw LookupError("unknown route id " + std::string(route_id));
  }
  return *it;
}

void Dataset::normalize() {
  std::ranges::sort(routes, {}, &Route::id);
  for (std::size_t i = 1; i < routes.size(); ++i) {
    if (routes[i].id() == routes[i - 1].id()) {
      throw ValidationError("duplicate route id " + routes[i].id());
    }
  }
}

Dataset load_dataset(const std::filesystem::path& dir, Split split) {
  const auto routes_path = dir / "routes.json";
  if (!std::filesystem::exists(routes_path)) {
    throw IoError("missing " + routes_path.string());
  }
  const json routes = parse_json_file(routes_path);
  require_object(routes, routes_path.string());
  const auto actuals = parse_optional(dir / "actual_sequences.json");
  const auto times = parse_optional(dir / "travel_times.json");
  const auto qualities = parse_optional(dir / "quality.json");

  auto check_keys = [&](const std::optional<json>& j, const char* file) {
    if (!j) {
      return;
    }
    require_object(*j, file);
    for (const auto& [rid, _] : j->items()) {
      if (!routes.contains(rid)) {
        throw ValidationError(std::string(file) + " names unknown route " + rid);
      }
    }
  };
  check_keys(actuals, "actual_sequences.json");
  check_keys(times, "travel_times.json");
  check_keys(qualities, "quality.json");

  Dataset out;
  out.split = split;
  out.routes.reserve(routes.size());
  for (const auto& [rid, r] : routes.items()) {
    std::vector<Stop> stops = parse_stops(rid, r);

    std::optional<TravelTimeMatrix> matrix;
    if (times && times->contains(rid)) {
      matrix = parse_travel_times(rid, times->at(rid), stops);
    }
    std::optional<StopSequence> actual;
    if (actuals && actuals->contains(rid)) {
      actual = parse_actual(rid, actuals->at(rid));
    }
    std::optional<Quality> quality;
    if (qualities && qualities->contains(rid)) {
      const auto& q = qualities->at(rid);
      if (!q.is_string()) {
        throw ValidationError("route " + rid + ": quality is not a string");
      }
      quality = parse_quality(q.get<std::string>());
    } else if (r.contains("route_score") && r.at("route_score").is_string()) {
      quality = parse_quality(r.at("route_score").get<std::string>());
    }

    Route route(rid, std::move(stops), std::move(matrix), std::move(actual),
                quality);
    out.routes.push_back(impute_missing_zones(route));
  }
  out.normalize();
  return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  json routes = json::object();
  json actuals = json::object();
  json times = json::object();
  json qualities = json::object();

  for (const Route& route : dataset.routes) {
    json stops = json::object();
    for (const Stop& s : route.stops()) {
      if (s.is_depot()) {
        continue;
      }
      stops[s.id] = {{"lat", s.pos.lat},
                     {"lng", s.pos.lng},
                     {"zone_id", s.zone_id ? json(*s.zone_id) : json(nullptr)}};
    }
    const Stop& depot = route.depot();
    routes[route.id()] = {
      {"depot", {{"id", depot.id}, {"lat", depot.pos.lat}, {"lng", depot.pos.lng}}},
      {"stops", std::move(stops)}};

    if (route.actual()) {
      json positions = json::object();
      const auto& seq = route.actual()->stops;
      for (std::size_t i = 0; i < seq.size(); ++i) {
        positions[seq[i]] = i;
      }
      actuals[route.id()] = std::move(positions);
    }
    if (route.travel_times()) {
      const auto& m = *route.travel_times();
      json rows = json::object();
      for (Index a = 0; a < m.size(); ++a) {
        json row = json::object();
        for (Index b = 0; b < m.size(); ++b) {
          row[m.ids()[b]] = m.at(a, b);
        }
        rows[m.ids()[a]] = std::move(row);
      }
      times[route.id()] = std::move(rows);
    }
    if (route.quality()) {
      qualities[route.id()] = std::string(to_string(*route.quality()));
    }
  }

  io::write_file_atomic(dir / "routes.json", routes.dump() + "\n");
  if (!actuals.empty()) {
    io::write_file_atomic(dir / "actual_sequences.json", actuals.dump() + "\n");
  }
  if (!times.empty()) {
    io::write_file_atomic(dir / "travel_times.json", times.dump() + "\n");
  }
  if (!qualities.empty()) {
    io::write_file_atomic(dir / "quality.json", qualities.dump() + "\n");
  }
}

std::string impute_zone(const Route& route, Index stop) {
  std::optional<Index> best;
  double best_d = 0.0;
  for (Index i = 0; i < route.size(); ++i) {
    const Stop& s = route.stop(i);
    if (i == stop || s.is_depot() || !s.zone_id) {
      continue;
    }
    // Index order is id order, so strict < keeps the smaller id on ties.
    const double d = route.distance(stop, i);
    if (!best || d < best_d) {
      best = i;
      best_d = d;
    }
  }
  if (!best) {
    throw ValidationError("route " + route.id() + ": cannot impute zone of stop " +
                          route.stop(stop).id + ", no stop in the route is zoned");
  }
  return *route.stop(*best).zone_id;
}

Route impute_missing_zones(const Route& route) {
  std::vector<Stop> stops(route.stops().begin(), route.stops().end());
  bool changed = false;
  for (Index i = 0; i < stops.size(); ++i) {
    if (!stops[i].is_depot() && !stops[i].zone_id) {
      stops[i].zone_id = impute_zone(route, i);
      changed = true;
    }
  }
  if (!changed) {
    return route;
  }
  return Route(route.id(), std::move(stops), route.travel_times(),
               route.actual(), route.quality());
}

std::vector<ZoneRun> zone_runs(const Route& route, const StopSequence& actual) {
  std::vector<ZoneRun> runs;
  for (std::size_t pos = 0; pos < actual.stops.size(); ++pos) {
    const Stop& s = route.stop(actual.stops[pos]);
    if (s.is_depot()) {
      continue;
    }
    if (!s.zone_id) {
      throw ValidationError("route " + route.id() + ": stop " + s.id +
                            " has no zone");
    }
    if (!runs.empty() && runs.back().zone_id == *s.zone_id &&
        runs.back().first_position + runs.back().stop_count == pos) {
      ++runs.back().stop_count;
    } else {
      runs.push_back({*s.zone_id, 1, pos});
    }
  }
  return runs;
}

ZoneSequence collapse_to_zsgt(std::span<const ZoneRun> runs,
                              std::string route_id) {
  std::map<std::string_view, std::size_t> kept;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto [it, inserted] = kept.try_emplace(runs[i].zone_id, i);
    if (!inserted && runs[i].stop_count > runs[it->second].stop_count) {
      it->second = i;
    }
  }
  std::vector<std::size_t> order;
  order.reserve(kept.size());
  for (const auto& [_, i] : kept) {
    order.push_back(i);
  }
  std::ranges::sort(order);
  ZoneSequence out{std::move(route_id), {}};
  out.zones.reserve(order.size());
  for (const std::size_t i : order) {
    out.zones.push_back(runs[i].zone_id);
  }
  return out;
}

ZoneSequence ground_truth_zones(const Route& route) {
  if (!route.actual()) {
    throw ValidationError("route " + route.id() + " has no actual sequence");
  }
  const auto runs = zone_runs(route, *route.actual());
  return collapse_to_zsgt(runs, route.id());
}

std::vector<ZoneSequence> training_corpus(const Dataset& dataset,
                                          bool include_low) {
  std::vector<const Route*> selected;
  for (const Route& r : dataset.routes) {
    if (r.actual() && (include_low || r.quality() != Quality::Low)) {
      selected.push_back(&r);
    }
  }
  std::vector<ZoneSequence> corpus(selected.size());
  parallel_for(selected.size(), [&](std::size_t i) {
    corpus[i] = ground_truth_zones(*selected[i]);
  });
  std::erase_if(corpus, [](const ZoneSequence& z) { return z.zones.empty(); });
  return corpus;
}

} // namespace zoneseq
