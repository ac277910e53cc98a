#include "zoneseq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <json.hpp>

#include "zoneseq/io.hpp"

namespace zoneseq::synth {

namespace {

constexpr double meters_per_deg_lat = earth_radius_m * std::numbers::pi / 180.0;
// Templates carry a few spare zones so routes can take different windows.
constexpr std::size_t template_slack = 5;

struct Template {
  LatLng station;
  std::vector<std::string> zones; // driver order
  std::vector<LatLng> centers;    // parallel to zones
};

LatLng offset(const LatLng& p, double north_m, double east_m) {
  const double lat = p.lat + north_m / meters_per_deg_lat;
  const double lng =
    p.lng + east_m / (meters_per_deg_lat * std::cos(p.lat * std::numbers::pi / 180.0));
  return {std::clamp(lat, -90.0, 90.0), std::clamp(lng, -180.0, 180.0)};
}

class Generator {
public:
  explicit Generator(const SynthConfig& c) : _c(c), _rng(c.seed) {}

  SynthOutput run() {
    SynthOutput out;
    for (std::size_t t = 0; t < _c.zone_templates; ++t) {
      _templates.push_back(make_template(t));
      out.templates.push_back({"template_" + std::to_string(t), _templates.back().zones});
    }
    out.train.split = Split::Train;
    out.eval.split = Split::Eval;
    const std::size_t total = _c.train_routes + _c.eval_routes;
    for (std::size_t r = 0; r < total; ++r) {
      char id[48];
      std::snprintf(id, sizeof id, "RouteID_synth_%05zu", r);
      const bool train = r < _c.train_routes;
      auto [route, planted] = make_route(id, train);
      out.planted.emplace(id, std::move(planted));
      (train ? out.train : out.eval).routes.push_back(std::move(route));
    }
    out.train.normalize();
    out.eval.normalize();
    return out;
  }

private:
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(_rng);
  }
  std::size_t pick(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(_rng);
  }

  Template make_template(std::size_t t) {
    Template tpl;
    const GeoBox& b = _c.bbox;
    tpl.station = {uniform(b.lat_min, b.lat_max), uniform(b.lng_min, b.lng_max)};

    const std::size_t len = _c.zones_max + template_slack;
    // Hierarchical ids shaped like "C-17.3D" so all four token slots vary.
    const char letter = static_cast<char>('A' + t % 26);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < len; ++i) {
      ids.push_back(std::string(1, letter) + "-" + std::to_string(1 + 4 * t + i / 10) +
                    "." + std::to_string(1 + (i % 10) / 2) +
                    static_cast<char>('A' + i % 2));
    }
    std::ranges::shuffle(ids, _rng);
    tpl.zones = std::move(ids);

    // Zone centres follow a persistent random walk in driver order, starting a
    // few kilometres from the station.
    double heading = uniform(0.0, 2.0 * std::numbers::pi);
    LatLng p = offset(tpl.station, 3000.0 * std::sin(heading), 3000.0 * std::cos(heading));
    for (std::size_t i = 0; i < len; ++i) {
      tpl.centers.push_back(p);
      heading += uniform(-0.9, 0.9);
      p = offset(p, _c.zone_step_m * std::sin(heading), _c.zone_step_m * std::cos(heading));
    }
    return tpl;
  }

  std::pair<Route, ZoneSequence> make_route(const std::string& id, bool train) {
    const Template& tpl = _templates[pick(0, _templates.size() - 1)];
    const std::size_t nz = pick(_c.zones_min, _c.zones_max);
    const std::size_t first = pick(0, tpl.zones.size() - nz);

    std::vector<std::size_t> order(nz);
    for (std::size_t i = 0; i < nz; ++i) {
      order[i] = first + i;
    }
    ZoneSequence planted{id, {}};
    for (const std::size_t z : order) {
      planted.zones.push_back(tpl.zones[z]);
    }
    for (std::size_t i = 0; i + 1 < nz; ++i) {
      const bool keep = uniform(0.0, 1.0) < _c.pattern_strength;
      const bool coin = uniform(0.0, 1.0) < 0.5;
      if (!keep && coin) {
        std::swap(order[i], order[i + 1]);
      }
    }

    // Stops per zone, scattered around the zone centre.
    std::vector<std::vector<LatLng>> zone_points(nz);
    std::size_t n_stops = 0;
    for (std::size_t i = 0; i < nz; ++i) {
      const std::size_t count = pick(_c.stops_min, _c.stops_max);
      std::normal_distribution<double> scatter(0.0, _c.cluster_sigma_m);
      for (std::size_t s = 0; s < count; ++s) {
        const double north = scatter(_rng);
        const double east = scatter(_rng);
        zone_points[i].push_back(offset(tpl.centers[order[i]], north, east));
      }
      n_stops += count;
    }
    std::vector<std::size_t> labels(n_stops);
    for (std::size_t i = 0; i < n_stops; ++i) {
      labels[i] = i;
    }
    std::ranges::shuffle(labels, _rng);

    std::vector<Stop> stops;
    stops.push_back({"DEPOT", tpl.station, std::nullopt, StopKind::Depot});
    std::vector<std::vector<std::size_t>> zone_stop_idx(nz);
    std::size_t next = 0;
    for (std::size_t i = 0; i < nz; ++i) {
      for (const auto& pos : zone_points[i]) {
        char sid[32];
        std::snprintf(sid, sizeof sid, "S%04zu", labels[next++]);
        zone_stop_idx[i].push_back(stops.size());
        stops.push_back({sid, pos, tpl.zones[order[i]], StopKind::Delivery});
      }
    }

    // Driver sequence: zones in the chosen order, nearest neighbour inside.
    StopSequence actual{id, {"DEPOT"}};
    LatLng cur = tpl.station;
    for (std::size_t i = 0; i < nz; ++i) {
      auto pending = zone_stop_idx[i];
      while (!pending.empty()) {
        auto best = pending.begin();
        for (auto it = pending.begin(); it != pending.end(); ++it) {
          if (haversine_m(cur, stops[*it].pos) < haversine_m(cur, stops[*best].pos)) {
            best = it;
          }
        }
        actual.stops.push_back(stops[*best].id);
        cur = stops[*best].pos;
        pending.erase(best);
      }
    }

    const std::size_t n = stops.size();
    std::vector<std::string> ids(n);
    std::vector<double> times(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      ids[a] = stops[a].id;
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b) {
          // Mild asymmetry, as on real one-way streets.
          times[a * n + b] =
            haversine_m(stops[a].pos, stops[b].pos) / _c.speed_mps * uniform(1.0, 1.15);
        }
      }
    }

    Quality quality = Quality::High;
    if (train) {
      const double q = uniform(0.0, 1.0);
      quality = q < 0.45 ? Quality::High : (q < 0.98 ? Quality::Medium : Quality::Low);
    }

    Route route(id, std::move(stops), TravelTimeMatrix(std::move(ids), std::move(times)),
                std::move(actual), quality);
    return {std::move(route), std::move(planted)};
  }

  const SynthConfig& _c;
  std::mt19937_64 _rng;
  std::vector<Template> _templates;
};

} // namespace

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError("synth config: " + what); };
  if (c.zones_min < 1 || c.zones_min > c.zones_max) {
    fail("zones_per_route range is empty");
  }
  if (c.stops_min < 1 || c.stops_min > c.stops_max) {
    fail("stops_per_zone range is empty");
  }
  if (c.zone_templates < 1) {
    fail("need at least one zone template");
  }
  if (!(c.pattern_strength >= 0.0 && c.pattern_strength <= 1.0)) {
    fail("pattern_strength must lie in [0, 1]");
  }
  const GeoBox& b = c.bbox;
  if (!(b.lat_min <= b.lat_max && b.lng_min <= b.lng_max && b.lat_min >= -85.0 &&
        b.lat_max <= 85.0 && b.lng_min >= -180.0 && b.lng_max <= 180.0)) {
    fail("invalid bounding box");
  }
  if (!(c.cluster_sigma_m > 0.0 && c.zone_step_m > 0.0 && c.speed_mps > 0.0)) {
    fail("sigma, zone step and speed must be positive");
  }
}

SynthConfig read_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed synth config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("synth config must be a JSON object");
  }
  SynthConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) {
        j.at(key).get_to(field);
      }
    };
    get("seed", c.seed);
    get("train_routes", c.train_routes);
    get("eval_routes", c.eval_routes);
    get("zone_templates", c.zone_templates);
    get("pattern_strength", c.pattern_strength);
    get("cluster_sigma_m", c.cluster_sigma_m);
    get("zone_step_m", c.zone_step_m);
    get("speed_mps", c.speed_mps);
    if (j.contains("zones_per_route")) {
      c.zones_min = j.at("zones_per_route").at(0).get<std::size_t>();
      c.zones_max = j.at("zones_per_route").at(1).get<std::size_t>();
    }
    if (j.contains("stops_per_zone")) {
      c.stops_min = j.at("stops_per_zone").at(0).get<std::size_t>();
      c.stops_max = j.at("stops_per_zone").at(1).get<std::size_t>();
    }
    if (j.contains("geo_bbox")) {
      const auto& b = j.at("geo_bbox");
      c.bbox = {b.at("lat_min").get<double>(), b.at("lat_max").get<double>(),
                b.at("lng_min").get<double>(), b.at("lng_max").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("synth config " + path.string() + ": " + e.what());
  }
  validate(c);
  return c;
}

SynthOutput generate(const SynthConfig& config) {
  validate(config);
  return Generator(config).run();
}

void write(const SynthOutput& output, const std::filesystem::path& dir) {
  write_dataset(output.train, dir / "train");
  write_dataset(output.eval, dir / "eval");
}

} // namespace zoneseq::synth
