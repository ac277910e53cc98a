#include <doctest.h>

#include <algorithm>

#include "zoneseq/pipeline.hpp"
#include "zoneseq/synth.hpp"

using namespace zoneseq;

namespace {

synth::SynthOutput small_data() {
  synth::SynthConfig c;
  c.train_routes = 30;
  c.eval_routes = 8;
  c.zones_min = 5;
  c.zones_max = 8;
  c.stops_min = 2;
  c.stops_max = 5;
  c.zone_templates = 3;
  return synth::generate(c);
}

} // namespace

TEST_CASE("every policy yields a full stop permutation") {
  const auto data = small_data();
  const auto model = ppm::PpmModel::train(training_corpus(data.train));
  for (const ZonePolicy p :
       {ZonePolicy::Rollout, ZonePolicy::Alphabetical, ZonePolicy::GroundTruth}) {
    SequenceOptions o;
    o.policy = p;
    const auto results = sequence_dataset(data.eval, &model, o);
    REQUIRE(results.size() == data.eval.routes.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
      const Route& r = data.eval.routes[i];
      const auto& res = results[i];
      CHECK(res.stops.route_id == r.id());
      CHECK(res.zones.route_id == r.id());
      CHECK(res.stops.stops.front() == r.depot().id);
      auto got = res.stops.stops;
      auto want = r.actual()->stops;
      std::ranges::sort(got);
      std::ranges::sort(want);
      CHECK(got == want);
      auto zs = res.zones.zones;
      std::ranges::sort(zs);
      CHECK(zs == r.zones());
      CHECK(res.zone_ms >= 0.0);
      CHECK(res.stop_ms >= 0.0);
      if (p == ZonePolicy::Alphabetical) {
        CHECK(res.zones.zones == r.zones());
      }
      if (p == ZonePolicy::GroundTruth) {
        CHECK(res.zones == ground_truth_zones(r));
      }
    }
  }
}

TEST_CASE("parallel and serial dataset sequencing agree") {
  const auto data = small_data();
  const auto model = ppm::PpmModel::train(training_corpus(data.train));
  const SequenceOptions o;
  const auto a = sequence_dataset(data.eval, &model, o);
  const auto b = sequence_dataset_serial(data.eval, &model, o);
  CHECK(to_submission(a) == to_submission(b));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].zones == b[i].zones);
  }
}

TEST_CASE("rollout policy requires a model") {
  const auto data = small_data();
  CHECK_THROWS_AS(sequence_route(data.eval.routes[0], nullptr, {}), ConfigError);
  SequenceOptions o;
  o.policy = ZonePolicy::Alphabetical;
  CHECK_NOTHROW(sequence_route(data.eval.routes[0], nullptr, o));
}

TEST_CASE("policy names") {
  CHECK(to_string(ZonePolicy::Rollout) == "rollout");
  CHECK(to_string(ZonePolicy::Alphabetical) == "alphabetical");
  CHECK(to_string(ZonePolicy::GroundTruth) == "zsgt-oracle");
}
