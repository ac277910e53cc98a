#include <doctest.h>

#include <algorithm>

#include <chrono>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "zoneseq/ppm.hpp"

using namespace zoneseq;
using namespace zoneseq::ppm;

namespace {

ZoneSequence zs(std::vector<std::string> z) { return {"", std::move(z)}; }

// [A,B,A,B,A], component 0 only, K = 1, no sentinel.
PpmModel toy_model() {
  const std::vector<ZoneSequence> corpus = {zs({"A", "B", "A", "B", "A"})};
  return PpmModel::train(corpus, {1, {1, 0, 0, 0}, false});
}

std::string random_zone(std::mt19937_64& rng) {
  static const char* letters = "ABC";
  std::string z(1, letters[rng() % 3]);
  z += "-" + std::to_string(1 + rng() % 3);
  if (rng() % 4 != 0) {
    z += "." + std::to_string(1 + rng() % 2) + static_cast<char>('A' + rng() % 2);
  }
  return z;
}

std::vector<ZoneSequence> random_corpus(std::mt19937_64& rng, std::size_t n) {
  std::vector<ZoneSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    ZoneSequence s;
    const std::size_t len = 1 + rng() % 8;
    for (std::size_t j = 0; j < len; ++j) {
      s.zones.push_back(random_zone(rng));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::vector<std::string>> component_streams(
  const std::vector<ZoneSequence>& corpus, std::size_t k) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : corpus) {
    std::vector<std::string> t = {tokenize_zone("stz")[k]};
    for (const auto& z : s.zones) {
      t.push_back(tokenize_zone(z)[k]);
    }
    out.push_back(std::move(t));
  }
  return out;
}

} // namespace

TEST_CASE("tokenize_zone") {
  const std::string e(empty_token);
  CHECK(tokenize_zone("C-17.3D").parts ==
        std::array<std::string, 4>{"C-17.3D", "C", "17", "3D"});
  CHECK(tokenize_zone("stz").parts == std::array<std::string, 4>{"stz", "stz", e, e});
  CHECK(tokenize_zone("A-1.2D").parts ==
        std::array<std::string, 4>{"A-1.2D", "A", "1", "2D"});
  CHECK(tokenize_zone("a.b.c.d.e").parts ==
        std::array<std::string, 4>{"a.b.c.d.e", "a", "b", "c"});
  CHECK(tokenize_zone("--").parts == std::array<std::string, 4>{"--", e, e, e});
  CHECK_THROWS_AS(tokenize_zone(""), ValidationError);
}

TEST_CASE("training counts") {
  const std::vector<ZoneSequence> one = {zs({"A", "B"})};
  const PpmModel m = PpmModel::train(one, {1, default_weights, true});
  const std::vector<std::string> none;
  const std::vector<std::string> stz = {"stz"};
  const std::vector<std::string> a = {"A"};
  CHECK(m.count(0, stz, "A") == 1);
  CHECK(m.count(0, a, "B") == 1);
  CHECK(m.count(0, none, "A") == 1);
  CHECK(m.count(0, none, "B") == 1);
  CHECK(m.count(0, none, "stz") == 0);
  CHECK(m.count(0, a, "A") == 0);

  const std::vector<ZoneSequence> twice = {zs({"A", "B"}), zs({"A", "B"})};
  const PpmModel m2 = PpmModel::train(twice, {1, default_weights, true});
  for (std::size_t k = 0; k < component_count; ++k) {
    const auto c1 = m.contexts(k);
    const auto c2 = m2.contexts(k);
    REQUIRE(c1.size() == c2.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
      CHECK(c1[i].context == c2[i].context);
      CHECK(c2[i].total == 2 * c1[i].total);
      REQUIRE(c1[i].successors.size() == c2[i].successors.size());
      for (std::size_t j = 0; j < c1[i].successors.size(); ++j) {
        CHECK(c2[i].successors[j].second == 2 * c1[i].successors[j].second);
      }
    }
  }
}

TEST_CASE("training rejects bad input") {
  const std::vector<ZoneSequence> empty;
  CHECK_THROWS_AS(PpmModel::train(empty), ValidationError);
  const std::vector<ZoneSequence> one = {zs({"A"})};
  CHECK_THROWS_AS(PpmModel::train(one, {0, default_weights, true}), ConfigError);
  CHECK_THROWS_AS(PpmModel::train(one, {1, {0.5, 0.5, 0.5, 0}, true}), ConfigError);
  CHECK_THROWS_AS(validate_weights({-0.5, 0.5, 0.5, 0.5}), ConfigError);
}

TEST_CASE("toy corpus probabilities") {
  const PpmModel m = toy_model();
  const std::vector<std::string> a = {"A"};
  CHECK(std::abs(m.prob(a, "B") - 3.0 / 4.0) < 1e-12);
  CHECK(std::abs(m.prob(a, "C") - 1.0 / 60.0) < 1e-12);
  // No exclusion: A gets escape mass from the order-0 estimate as well.
  CHECK(std::abs(m.prob(a, "A") - 1.0 / 8.0) < 1e-12);
  // Hence the mass over V and the unseen class falls short of 1.
  const double total = m.prob(a, "A") + m.prob(a, "B") + m.prob(a, "Z");
  CHECK(total > 0.0);
  CHECK(total <= 1.0);
  CHECK(std::abs(total - (3.0 / 4 + 1.0 / 8 + 1.0 / 60)) < 1e-12);
}

TEST_CASE("seq_reward") {
  const PpmModel m = toy_model();
  // P(A|stz) backs off to order 0: 5/10. Then 3/4 and 1/60.
  CHECK(std::abs(seq_reward(m, zs({"A", "B", "C"})) - (0.5 + 0.75 + 1.0 / 60)) < 1e-12);
  const std::vector<std::string> stz = {"stz"};
  CHECK(seq_reward(m, zs({"B"})) == m.prob(stz, "B"));

  std::mt19937_64 rng(3);
  const auto corpus = random_corpus(rng, 30);
  const PpmModel r = PpmModel::train(corpus);
  for (int trial = 0; trial < 50; ++trial) {
    ZoneSequence s;
    for (int i = 0; i < 1 + trial % 9; ++i) {
      s.zones.push_back(random_zone(rng));
    }
    const std::string z = random_zone(rng);
    ZoneSequence longer = s;
    longer.zones.push_back(z);
    std::vector<std::string> ctx = {"stz"};
    ctx.insert(ctx.end(), s.zones.begin(), s.zones.end());
    CHECK(seq_reward(r, longer) == doctest::Approx(seq_reward(r, s) + r.prob(ctx, z)).epsilon(1e-14));
    CHECK(seq_reward(r, longer, Objective::LogProbability) < 0.0);
  }
}

TEST_CASE("prob matches a direct-count oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto corpus = random_corpus(rng, 1 + rng() % 12);
    const std::size_t order = 1 + rng() % 5;
    const PpmModel m = PpmModel::train(corpus, {order, default_weights, true});
    std::array<oracle::PpmD, component_count> comps = {
      oracle::PpmD(component_streams(corpus, 0), order, 1),
      oracle::PpmD(component_streams(corpus, 1), order, 1),
      oracle::PpmD(component_streams(corpus, 2), order, 1),
      oracle::PpmD(component_streams(corpus, 3), order, 1)};
    for (int q = 0; q < 20; ++q) {
      std::vector<std::string> ctx = {"stz"};
      for (std::size_t i = 0; i < rng() % 7; ++i) {
        ctx.push_back(random_zone(rng));
      }
      const std::string cand = random_zone(rng);
      double expect = 0.0;
      for (std::size_t k = 0; k < component_count; ++k) {
        std::vector<std::string> tctx;
        for (const auto& z : ctx) {
          tctx.push_back(tokenize_zone(z)[k]);
        }
        expect += 0.25 * comps[k].prob(tctx, tokenize_zone(cand)[k]);
      }
      const double got = m.prob(ctx, cand);
      CHECK(got > 0.0);
      CHECK(got <= 1.0);
      CHECK(std::abs(got - expect) < 1e-12);
    }
  }
}

TEST_CASE("every context is exactly normalised") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const PpmModel m = PpmModel::train(random_corpus(rng, 1 + rng() % 10));
    for (std::size_t k = 0; k < component_count; ++k) {
      for (const auto& c : m.contexts(k)) {
        std::uint64_t sum = 0;
        std::uint64_t mass = 0;
        for (const auto& [_, n] : c.successors) {
          CHECK(n > 0);
          sum += n;
          mass += 2 * n - 1;
        }
        CHECK(sum == c.total);
        CHECK(mass + c.successors.size() == 2 * c.total);
      }
    }
  }
}

TEST_CASE("one-hot weights isolate a component") {
  const std::vector<ZoneSequence> corpus = {zs({"A-1.1A", "A-2.1B", "B-1.1A"}),
                                            zs({"A-1.1A", "B-2.2B"})};
  const PpmModel base = PpmModel::train(corpus);
  const std::vector<std::string> ctx = {"stz", "A-1.1A"};
  for (std::size_t k = 0; k < component_count; ++k) {
    Weights w{};
    w[k] = 1.0;
    const PpmModel m = base.with_weights(w);
    // Candidates sharing component k score the same.
    std::string other = k == 1 ? "A-9.9Z" : k == 2 ? "Q-2.9Z" : k == 3 ? "Q-9.1B" : "A-2.1B";
    if (k == 0) {
      CHECK(m.prob(ctx, "A-2.1B") == m.prob(ctx, other));
    } else {
      CHECK(m.prob(ctx, "A-2.1B") == m.prob(ctx, other));
      CHECK(m.prob(ctx, "A-2.1B") != m.prob(ctx, "Q-9.9Z"));
    }
  }
  CHECK_THROWS_AS(base.with_weights({1, 1, 0, 0}), ConfigError);
}

TEST_CASE("unknown zones stay strictly positive") {
  const PpmModel m = toy_model();
  const std::vector<std::string> ctx = {"never", "seen"};
  CHECK(m.prob(ctx, "X-99.9Z") > 0.0);
  const std::vector<std::string> none;
  CHECK(m.prob(none, "X") > 0.0);
}

TEST_CASE("serialisation") {
  std::mt19937_64 rng(29);
  const auto corpus = random_corpus(rng, 40);
  const PpmModel a = PpmModel::train(corpus);
  const PpmModel b = PpmModel::train(corpus);
  CHECK(a.serialize() == b.serialize());
  CHECK(a.serialize().substr(0, 4) == "ZPPM");

  const PpmModel back = PpmModel::deserialize(a.serialize());
  CHECK(back == a);
  const std::vector<std::string> ctx = {"stz", corpus[0].zones[0]};
  CHECK(back.prob(ctx, "B-2.1A") == a.prob(ctx, "B-2.1A"));

  const auto dir = fixtures::temp_dir("ppm");
  a.save(dir / "m.zppm");
  CHECK(PpmModel::load(dir / "m.zppm") == a);

  CHECK_THROWS_AS(PpmModel::deserialize("ZPPX"), ValidationError);
  const std::string bytes = a.serialize();
  CHECK_THROWS_AS(PpmModel::deserialize(bytes.substr(0, bytes.size() - 3)), ValidationError);
  CHECK_THROWS_AS(PpmModel::deserialize(bytes + "x"), ValidationError);
  CHECK_THROWS_AS(PpmModel::load(dir / "missing.zppm"), IoError);
}

TEST_CASE("training 6000 sequences is fast") {
  std::mt19937_64 rng(31);
  std::vector<ZoneSequence> corpus;
  for (int i = 0; i < 6000; ++i) {
    ZoneSequence s;
    const int base = static_cast<int>(rng() % 200);
    for (int j = 0; j < 30; ++j) {
      s.zones.push_back("Z-" + std::to_string(base + j) + "." + std::to_string(rng() % 3) + "A");
    }
    corpus.push_back(std::move(s));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const PpmModel m = PpmModel::train(corpus);
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs <= 10.0);
  CHECK(m.component(0).alphabet_size() > 0);
}
