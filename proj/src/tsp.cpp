#include "zoneseq/tsp.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_set>

namespace zoneseq::tsp {

namespace {

constexpr double improve_eps = 1e-9;

double median(std::vector<double> v) {
  std::ranges::sort(v);
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::uint8_t flag(NodeRole r) { return static_cast<std::uint8_t>(r); }

// First-improvement descent over segment exchanges. Exchanging the adjacent
// segments A = t[i+1..j] and B = t[j+1..l] keeps both orientations, so only
// the three boundary edges change.
class LocalSearch {
public:
  LocalSearch(const ZoneTspInstance& inst, TourOrder& tour, std::uint64_t seed)
    : _inst(inst), _t(tour), _n(tour.size()) {
    if (_n >= 3) {
      _scan.resize(_n - 2);
      std::iota(_scan.begin(), _scan.end(), Index{0});
      std::mt19937_64 rng(seed);
      std::ranges::shuffle(_scan, rng);
    }
  }

  // Descends until a local optimum or `budget` accepted moves; returns the
  // number of moves made.
  std::size_t run(std::size_t budget) {
    if (_n < 3) {
      return 0;
    }
    std::size_t moves = 0;
    while (moves < budget) {
      if (!pass(true) && !pass(false)) {
        break;
      }
      ++moves;
    }
    return moves;
  }

private:
  double c(Index a, Index b) const { return _inst.at(_t[a], _t[b]); }

  double delta(Index i, Index j, Index l) const {
    const Index next = (l + 1) % _n;
    return c(i, j + 1) + c(l, i + 1) + c(j, next) - c(i, i + 1) - c(j, j + 1) -
           c(l, next);
  }

  // Or-opt when restricted (one of the two segments has at most 3 nodes),
  // full 3-opt segment exchange otherwise. Applies the first improving move.
  bool pass(bool or_opt) {
    for (const Index i : _scan) {
      for (Index j = i + 1; j + 1 < _n; ++j) {
        const bool short_a = j - i <= 3;
        const Index l_end = (or_opt && !short_a) ? std::min(j + 3, _n - 1) : _n - 1;
        for (Index l = j + 1; l <= l_end; ++l) {
          if (!or_opt && (short_a || l - j <= 3)) {
            continue; // already covered by the Or-opt pass
          }
          if (delta(i, j, l) < -improve_eps) {
            std::rotate(_t.begin() + static_cast<std::ptrdiff_t>(i + 1),
                        _t.begin() + static_cast<std::ptrdiff_t>(j + 1),
                        _t.begin() + static_cast<std::ptrdiff_t>(l + 1));
            return true;
          }
        }
      }
    }
    return false;
  }

  const ZoneTspInstance& _inst;
  TourOrder& _t;
  std::size_t _n;
  std::vector<Index> _scan;
};

} // namespace

LatLng representative_node(std::span<const LatLng> points) {
  if (points.empty()) {
    throw ValidationError("representative node of an empty zone");
  }
  std::vector<double> lats;
  std::vector<double> lngs;
  lats.reserve(points.size());
  lngs.reserve(points.size());
  for (const auto& p : points) {
    lats.push_back(p.lat);
    lngs.push_back(p.lng);
  }
  return {median(std::move(lats)), median(std::move(lngs))};
}

ZoneTspInstance build_instance(const Route& route,
                               const ZoneSequence& zone_order,
                               std::size_t k,
                               std::optional<std::string_view> prev_last_stop) {
  if (k >= zone_order.zones.size()) {
    throw ValidationError("route " + route.id() + ": zone index " +
                          std::to_string(k) + " out of range");
  }
  const auto stops = route.zone_stops(zone_order.zones[k]);
  if (stops.empty()) {
    throw ValidationError("route " + route.id() + " has no stops in zone " +
                          zone_order.zones[k]);
  }

  ZoneTspInstance inst;
  // Route index of every node backed by a real stop.
  std::vector<std::optional<Index>> route_index;

  auto add_stop = [&](Index r, std::uint8_t roles) {
    const Stop& s = route.stop(r);
    inst.nodes.push_back({roles, s.id, {}, s.pos});
    route_index.push_back(r);
  };

  const Index depot = route.depot_index();
  if (k == 0) {
    add_stop(depot, flag(NodeRole::LastStop) | flag(NodeRole::Depot));
  } else {
    if (!prev_last_stop) {
      throw ValidationError("route " + route.id() +
                            ": last stop of the preceding zone is required");
    }
    add_stop(route.index_of(*prev_last_stop), flag(NodeRole::LastStop));
  }
  inst.start_index = 0;

  for (const Index r : stops) {
    add_stop(r, flag(NodeRole::ZoneStop));
  }
  for (std::size_t z = k + 1; z < zone_order.zones.size(); ++z) {
    const auto zs = route.zone_stops(zone_order.zones[z]);
    std::vector<LatLng> pts;
    pts.reserve(zs.size());
    for (const Index r : zs) {
      pts.push_back(route.stop(r).pos);
    }
    if (pts.empty()) {
      throw ValidationError("route " + route.id() + " has no stops in zone " +
                            zone_order.zones[z]);
    }
    inst.nodes.push_back(
      {flag(NodeRole::Representative), {}, zone_order.zones[z], representative_node(pts)});
    route_index.push_back(std::nullopt);
  }
  if (k == 0) {
    inst.depot_index = 0;
  } else {
    inst.depot_index = inst.nodes.size();
    add_stop(depot, flag(NodeRole::Depot));
  }

  const std::size_t n = inst.nodes.size();
  inst.cost.assign(n * n, 0.0);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (a == b) {
        continue;
      }
      inst.cost[a * n + b] =
        (route_index[a] && route_index[b])
          ? route.distance(*route_index[a], *route_index[b])
          : haversine_m(inst.nodes[a].pos, inst.nodes[b].pos);
    }
  }
  return inst;
}

double tour_cost(const ZoneTspInstance& instance, std::span<const Index> tour) {
  double total = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    total += instance.at(tour[i], tour[(i + 1) % tour.size()]);
  }
  return total;
}

TourOrder nearest_neighbor_tour(const ZoneTspInstance& instance) {
  const std::size_t n = instance.size();
  TourOrder tour;
  tour.reserve(n);
  std::vector<bool> used(n, false);
  Index cur = instance.start_index;
  tour.push_back(cur);
  used[cur] = true;
  while (tour.size() < n) {
    Index best = n;
    for (Index j = 0; j < n; ++j) {
      if (!used[j] && (best == n || instance.at(cur, j) < instance.at(cur, best))) {
        best = j;
      }
    }
    tour.push_back(best);
    used[best] = true;
    cur = best;
  }
  return tour;
}

TourOrder solve_atsp(const ZoneTspInstance& instance,
                     std::uint64_t seed,
                     const LocalSearchOptions& options) {
  const std::size_t n = instance.size();
  const std::size_t budget = options.budget_per_node * n;
  std::mt19937_64 rng(seed);
  TourOrder best = nearest_neighbor_tour(instance);
  std::size_t used = LocalSearch(instance, best, rng()).run(budget);
  if (n < 4) {
    return best;
  }
  double best_cost = tour_cost(instance, best);
  // Iterated local search: kick the incumbent with a random segment exchange,
  // descend again, keep the result only if it is strictly cheaper.
  const std::size_t kicks = options.kicks_per_node * n;
  for (std::size_t k = 0; k < kicks && used < budget; ++k) {
    TourOrder cand = best;
    const Index i = rng() % (n - 2);
    const Index j = i + 1 + rng() % (n - 2 - i);
    const Index l = j + 1 + rng() % (n - 1 - j);
    std::rotate(cand.begin() + static_cast<std::ptrdiff_t>(i + 1),
                cand.begin() + static_cast<std::ptrdiff_t>(j + 1),
                cand.begin() + static_cast<std::ptrdiff_t>(l + 1));
    used += 1 + LocalSearch(instance, cand, rng()).run(budget - used - 1);
    const double c = tour_cost(instance, cand);
    if (c < best_cost - improve_eps) {
      best = std::move(cand);
      best_cost = c;
    }
  }
  return best;
}

std::vector<std::string> order_zone_stops(const ZoneTspInstance& instance,
                                          std::span<const Index> tour) {
  const auto start = std::ranges::find(tour, instance.start_index);
  if (tour.size() != instance.size() || start == tour.end()) {
    throw ValidationError("tour does not match its instance");
  }
  const std::size_t offset = static_cast<std::size_t>(start - tour.begin());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    const TspNode& node = instance.nodes[tour[(offset + i) % tour.size()]];
    if (node.has(NodeRole::ZoneStop)) {
      out.push_back(node.stop_id);
    }
  }
  return out;
}

StopSequence sequence_stops(const Route& route,
                            const ZoneSequence& zone_order,
                            const AtspSolver& solver,
                            std::uint64_t seed) {
  auto expected = route.zones();
  auto given = zone_order.zones;
  std::ranges::sort(given);
  if (given != expected) {
    throw ValidationError("route " + route.id() +
                          ": zone order is not a permutation of the route's zones");
  }

  StopSequence out{route.id(), {route.depot().id}};
  out.stops.reserve(route.size());
  std::string last = route.depot().id;
  for (std::size_t k = 0; k < zone_order.zones.size(); ++k) {
    const auto inst = build_instance(route, zone_order, k, last);
    const auto tour = solver.solve(inst, seed);
    const auto stops = order_zone_stops(inst, tour);
    out.stops.insert(out.stops.end(), stops.begin(), stops.end());
    last = stops.back();
  }
  return out;
}

} // namespace zoneseq::tsp
