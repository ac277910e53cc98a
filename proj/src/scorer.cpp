#include "zoneseq/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include <json.hpp>

#include "zoneseq/io.hpp"
#include "zoneseq/parallel.hpp"

namespace zoneseq::scorer {

using nlohmann::json;

namespace {

std::vector<std::string> without_depot(const Route& route,
                                       std::span<const std::string> seq) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (const auto& s : seq) {
    if (s != route.depot().id) {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<const Route*> scored_routes(const Dataset& dataset,
                                        const Submission& submission) {
  std::vector<const Route*> out;
  for (const Route& r : dataset.routes) {
    if (!r.actual()) {
      continue;
    }
    if (!submission.contains(r.id())) {
      throw ValidationError("submission has no sequence for route " + r.id());
    }
    out.push_back(&r);
  }
  return out;
}

ScoreReport finish(std::vector<RouteScore> scores) {
  ScoreReport report;
  double sum = 0.0;
  for (const auto& s : scores) {
    sum += s.score;
  }
  report.mean_score = scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
  report.routes = std::move(scores);
  return report;
}

} // namespace

double sequence_deviation(std::span<const std::string> actual,
                          std::span<const std::string> submitted) {
  if (actual.size() != submitted.size()) {
    throw ValidationError("sequence deviation: sequences differ in length");
  }
  std::unordered_map<std::string_view, std::size_t> pos;
  pos.reserve(submitted.size());
  for (std::size_t i = 0; i < submitted.size(); ++i) {
    if (!pos.emplace(submitted[i], i).second) {
      throw ValidationError("sequence deviation: submitted repeats stop " +
                            submitted[i]);
    }
  }
  const std::size_t n = actual.size();
  if (n < 2) {
    return 0.0;
  }
  std::vector<long long> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = pos.find(actual[i]);
    if (it == pos.end()) {
      throw ValidationError("sequence deviation: submitted lacks stop " +
                            actual[i]);
    }
    r[i] = static_cast<long long>(it->second);
  }
  long long sum = 0;
  for (std::size_t i = 1; i < n; ++i) {
    sum += std::llabs(r[i] - r[i - 1]) - 1;
  }
  const double nn = static_cast<double>(n);
  return 2.0 * static_cast<double>(sum) / (nn * (nn - 1.0));
}

ErpResult erp(std::span<const std::string> actual,
              std::span<const std::string> submitted,
              const TravelTimeMatrix* matrix,
              std::string_view gap_ref) {
  if (matrix == nullptr) {
    throw ValidationError(
      "ERP needs a travel-time matrix; build a fallback with haversine_matrix()");
  }
  std::unordered_map<std::string_view, Index> index;
  for (Index i = 0; i < matrix->size(); ++i) {
    index.emplace(matrix->ids()[i], i);
  }
  auto lookup = [&](std::string_view id) {
    const auto it = index.find(id);
    if (it == index.end()) {
      throw LookupError("ERP: stop " + std::string(id) + " not in travel-time matrix");
    }
    return it->second;
  };
  const double scale = matrix->max_entry();
  auto t = [&](Index a, Index b) {
    return scale > 0.0 ? matrix->at(a, b) / scale : 0.0;
  };

  const Index g = lookup(gap_ref);
  const std::size_t n = actual.size();
  const std::size_t m = submitted.size();
  std::vector<Index> a(n);
  std::vector<Index> b(m);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = lookup(actual[i]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    b[j] = lookup(submitted[j]);
  }

  // cost[i][j] aligns actual[0..i) with submitted[0..j).
  std::vector<ErpResult> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> ErpResult& {
    return dp[i * (m + 1) + j];
  };
  auto step = [](const ErpResult& from, double c) {
    return ErpResult{from.cost + c, from.edits + (c != 0.0 ? 1u : 0u)};
  };
  for (std::size_t i = 1; i <= n; ++i) {
    at(i, 0) = step(at(i - 1, 0), t(a[i - 1], g));
  }
  for (std::size_t j = 1; j <= m; ++j) {
    at(0, j) = step(at(0, j - 1), t(b[j - 1], g));
  }
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      ErpResult best = step(at(i - 1, j - 1), t(a[i - 1], b[j - 1]));
      const ErpResult del = step(at(i - 1, j), t(a[i - 1], g));
      if (del.cost < best.cost) {
        best = del;
      }
      const ErpResult ins = step(at(i, j - 1), t(b[j - 1], g));
      if (ins.cost < best.cost) {
        best = ins;
      }
      at(i, j) = best;
    }
  }
  return at(n, m);
}

double combine(double sd, const ErpResult& e) {
  if (e.edits == 0) {
    return 0.0;
  }
  return sd * e.cost / static_cast<double>(e.edits);
}

RouteScore SdErpScorer::score(const Route& route,
                              const StopSequence& submitted) const {
  if (!route.actual()) {
    throw ValidationError("route " + route.id() + " has no actual sequence");
  }
  const auto actual = without_depot(route, route.actual()->stops);
  const auto sub = without_depot(route, submitted.stops);

  RouteScore s;
  s.route_id = route.id();
  try {
    s.sd = sequence_deviation(actual, sub);
    const TravelTimeMatrix* matrix = nullptr;
    TravelTimeMatrix fallback;
    if (route.travel_times()) {
      matrix = &*route.travel_times();
    } else if (_options.haversine_fallback) {
      fallback = haversine_matrix(route);
      matrix = &fallback;
    }
    const ErpResult e = erp(actual, sub, matrix, route.depot().id);
    s.erp_cost = e.cost;
    s.erp_edits = e.edits;
  } catch (const ValidationError& e) {
    throw ValidationError("route " + route.id() + ": " + e.what());
  }
  s.score = combine(s.sd, {s.erp_cost, s.erp_edits});
  return s;
}

RouteScore route_score(const Route& route,
                       const StopSequence& submitted,
                       const ScoreOptions& options) {
  return SdErpScorer(options).score(route, submitted);
}

ScoreReport dataset_score(const Dataset& dataset,
                          const Submission& submission,
                          const RouteScorer& scorer) {
  const auto routes = scored_routes(dataset, submission);
  std::vector<RouteScore> scores(routes.size());
  parallel_for(routes.size(), [&](std::size_t i) {
    const Route& r = *routes[i];
    scores[i] = scorer.score(r, StopSequence{r.id(), submission.at(r.id())});
  });
  return finish(std::move(scores));
}

ScoreReport dataset_score_serial(const Dataset& dataset,
                                 const Submission& submission,
                                 const RouteScorer& scorer) {
  const auto routes = scored_routes(dataset, submission);
  std::vector<RouteScore> scores;
  scores.reserve(routes.size());
  for (const Route* r : routes) {
    scores.push_back(scorer.score(*r, StopSequence{r->id(), submission.at(r->id())}));
  }
  return finish(std::move(scores));
}

Submission read_submission(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed submission JSON " + path.string() + ": " +
                          e.what());
  }
  if (!j.is_object()) {
    throw ValidationError("submission must map route ids to stop lists");
  }
  Submission out;
  for (const auto& [rid, seq] : j.items()) {
    if (!seq.is_array()) {
      throw ValidationError("submission for route " + rid + " is not a list");
    }
    auto& stops = out[rid];
    for (const auto& s : seq) {
      if (!s.is_string()) {
        throw ValidationError("submission for route " + rid +
                              " has a non-string stop id");
      }
      stops.push_back(s.get<std::string>());
    }
  }
  return out;
}

std::string submission_json(const Submission& submission) {
  json j = json::object();
  for (const auto& [rid, stops] : submission) {
    j[rid] = stops;
  }
  return j.dump(1) + "\n";
}

std::string report_json(const ScoreReport& report) {
  json routes = json::array();
  for (const auto& r : report.routes) {
    routes.push_back({{"route_id", r.route_id},
                      {"sd", r.sd},
                      {"erp_cost", r.erp_cost},
                      {"erp_edits", r.erp_edits},
                      {"score", r.score}});
  }
  json j = {{"aggregate",
             {{"mean_score", report.mean_score}, {"routes", report.routes.size()}}},
            {"routes", std::move(routes)}};
  return j.dump(1) + "\n";
}

} // namespace zoneseq::scorer
