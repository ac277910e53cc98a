#include "zoneseq/pipeline.hpp"

#include <chrono>

#include "zoneseq/parallel.hpp"

namespace zoneseq {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
    .count();
}

} // namespace

std::string_view to_string(ZonePolicy p) {
  switch (p) {
  case ZonePolicy::Rollout:
    return "rollout";
  case ZonePolicy::Alphabetical:
    return "alphabetical";
  case ZonePolicy::GroundTruth:
    return "zsgt-oracle";
  }
  return "rollout";
}

RouteResult sequence_route(const Route& route,
                           const ppm::PpmModel* model,
                           const SequenceOptions& options) {
  RouteResult out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto zones = route.zones();
  if (zones.empty()) {
    throw ValidationError("route " + route.id() + " has no zoned delivery stops");
  }
  switch (options.policy) {
  case ZonePolicy::Rollout:
    if (model == nullptr) {
      throw ConfigError("rollout zone ordering needs a trained model");
    }
    out.zones = rollout::rollout_sequence(*model, zones, options.rollout);
    break;
  case ZonePolicy::Alphabetical:
    out.zones.zones = zones;
    break;
  case ZonePolicy::GroundTruth:
    out.zones = ground_truth_zones(route);
    break;
  }
  out.zones.route_id = route.id();
  out.zone_ms = ms_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const tsp::BuiltinSolver builtin;
  const tsp::AtspSolver& solver = options.solver ? *options.solver : builtin;
  out.stops = tsp::sequence_stops(route, out.zones, solver, options.seed);
  out.stop_ms = ms_since(t1);
  return out;
}

std::vector<RouteResult> sequence_dataset(const Dataset& dataset,
                                          const ppm::PpmModel* model,
                                          const SequenceOptions& options) {
  std::vector<RouteResult> out(dataset.routes.size());
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = sequence_route(dataset.routes[i], model, options);
  });
  return out;
}

std::vector<RouteResult> sequence_dataset_serial(const Dataset& dataset,
                                                 const ppm::PpmModel* model,
                                                 const SequenceOptions& options) {
  SequenceOptions serial = options;
  serial.rollout.parallel = false;
  std::vector<RouteResult> out;
  out.reserve(dataset.routes.size());
  for (const Route& r : dataset.routes) {
    out.push_back(sequence_route(r, model, serial));
  }
  return out;
}

scorer::Submission to_submission(const std::vector<RouteResult>& results) {
  scorer::Submission s;
  for (const auto& r : results) {
    s[r.stops.route_id] = r.stops.stops;
  }
  return s;
}

} // namespace zoneseq
