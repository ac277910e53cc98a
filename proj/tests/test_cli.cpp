#include <doctest.h>

#include <algorithm>

#include <cstdlib>
#include <sys/wait.h>

#include <json.hpp>

#include "fixtures.hpp"
#include "zoneseq/cli.hpp"
#include "zoneseq/ppm.hpp"

using namespace zoneseq;

namespace {

// Exit status of the CLI binary run through the shell; `env` is prefixed
// verbatim (e.g. "ZSEQ_ORDER=3").
int zoneseq_cli(const std::string& args, const std::string& env = {}) {
  const std::string cmd = "env -u ZSEQ_CONFIG -u ZSEQ_ORDER " + env + " " +
                          ZONESEQ_CLI_PATH + " " + args + " --log-level off >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

struct SmallData {
  std::filesystem::path root;

  SmallData() : root(fixtures::temp_dir("cli")) {
    fixtures::write(root / "synth.json", R"({"train_routes": 12, "eval_routes": 3,
      "zones_per_route": [3, 5], "stops_per_zone": [2, 3], "zone_templates": 2})");
    REQUIRE(zoneseq_cli("synth --synth-config " + q(root / "synth.json") + " --out " +
                        q(root / "data")) == 0);
  }
};

} // namespace

TEST_CASE("weights parsing") {
  CHECK(cli::parse_weights("0.1,0.2,0.3,0.4") == ppm::Weights{0.1, 0.2, 0.3, 0.4});
  CHECK_THROWS_AS(cli::parse_weights("0.5,0.5"), ConfigError);
  CHECK_THROWS_AS(cli::parse_weights("0.5,0.5,x,0"), ConfigError);
  CHECK_THROWS_AS(cli::parse_weights("1,1,1,1"), ConfigError);
}

TEST_CASE("train, sequence and evaluate end to end") {
  const SmallData d;
  const auto model = d.root / "m.zppm";
  CHECK(zoneseq_cli("train --dataset " + q(d.root / "data/train") + " --model " + q(model)) ==
        0);
  CHECK(std::filesystem::exists(model));

  const auto sub = d.root / "sub.json";
  CHECK(zoneseq_cli("sequence --dataset " + q(d.root / "data/eval") + " --model " + q(model) +
                    " --out " + q(sub) + " --per-route-timing") == 0);
  const auto timing = nlohmann::json::parse(io::read_file(d.root / "sub.json.timing.json"));
  CHECK(timing.size() == 3);
  for (const auto& [_, t] : timing.items()) {
    CHECK(t.contains("zone_sequencing_ms"));
    CHECK(t.contains("stop_sorting_ms"));
  }

  const auto report = d.root / "report.json";
  CHECK(zoneseq_cli("evaluate --dataset " + q(d.root / "data/eval") + " --submission " +
                    q(sub) + " --out " + q(report)) == 0);
  const auto rep = nlohmann::json::parse(io::read_file(report));
  CHECK(rep["aggregate"]["routes"] == 3);
  CHECK(rep["aggregate"]["mean_score"].get<double>() >= 0.0);

  // Submitting the actual sequences scores exactly zero.
  const auto actual = nlohmann::json::parse(io::read_file(d.root / "data/eval/actual_sequences.json"));
  nlohmann::json ident = nlohmann::json::object();
  for (const auto& [rid, pos] : actual.items()) {
    std::vector<std::string> seq(pos.size());
    for (const auto& [sid, p] : pos.items()) {
      seq[p.get<std::size_t>()] = sid;
    }
    ident[rid] = seq;
  }
  fixtures::write(d.root / "ident.json", ident.dump());
  CHECK(zoneseq_cli("evaluate --dataset " + q(d.root / "data/eval") + " --submission " +
                    q(d.root / "ident.json") + " --out " + q(report)) == 0);
  CHECK(nlohmann::json::parse(io::read_file(report))["aggregate"]["mean_score"] == 0.0);
}

TEST_CASE("exit codes") {
  const auto dir = fixtures::temp_dir("cli-exit");
  std::filesystem::create_directories(dir / "empty");
  fixtures::write(dir / "empty/routes.json", "{}");
  CHECK(zoneseq_cli("train --dataset " + q(dir / "empty") + " --model " + q(dir / "m")) ==
        cli::exit_validation);
  CHECK(zoneseq_cli("train --dataset " + q(dir / "nowhere") + " --model " + q(dir / "m")) ==
        cli::exit_io);
  CHECK(zoneseq_cli("train --dataset " + q(dir / "empty") + " --model " + q(dir / "m") +
                    " --weights 1,1,0,0") == cli::exit_config);
  fixtures::write(dir / "bad.json", "{");
  CHECK(zoneseq_cli("train --config " + q(dir / "bad.json")) == cli::exit_config);
  CHECK(zoneseq_cli("train --dataset " + q(dir / "empty")) == cli::exit_config);
  CHECK(zoneseq_cli("frobnicate") == cli::exit_config);
  CHECK(zoneseq_cli("train --threads 0 --dataset x --model y") == cli::exit_config);
}

TEST_CASE("flag beats environment beats config file") {
  const SmallData d;
  const auto model = d.root / "k.zppm";
  const auto train = "train --dataset " + q(d.root / "data/train") + " --model " + q(model);
  fixtures::write(d.root / "cfg.json", R"({"order": 2})");
  const auto order = [&] { return ppm::PpmModel::load(model).max_order(); };

  REQUIRE(zoneseq_cli(train) == 0);
  CHECK(order() == ppm::default_max_order);
  REQUIRE(zoneseq_cli(train + " --config " + q(d.root / "cfg.json")) == 0);
  CHECK(order() == 2);
  REQUIRE(zoneseq_cli(train, "ZSEQ_CONFIG=" + q(d.root / "cfg.json")) == 0);
  CHECK(order() == 2);
  REQUIRE(zoneseq_cli(train + " --config " + q(d.root / "cfg.json"), "ZSEQ_ORDER=3") == 0);
  CHECK(order() == 3);
  REQUIRE(zoneseq_cli(train + " --config " + q(d.root / "cfg.json") + " --order 4",
                      "ZSEQ_ORDER=3") == 0);
  CHECK(order() == 4);
  CHECK(zoneseq_cli(train, "ZSEQ_ORDER=zero") == cli::exit_config);
}

TEST_CASE("bench writes per-policy files") {
  const SmallData d;
  const auto out = d.root / "bench";
  CHECK(zoneseq_cli("bench --dataset " + q(d.root / "data") + " --out " + q(out)) == 0);
  for (const char* p : {"rollout", "alphabetical", "zsgt-oracle"}) {
    CHECK(std::filesystem::exists(out / (std::string(p) + "_submission.json")));
    CHECK(std::filesystem::exists(out / (std::string(p) + "_report.json")));
  }
  const auto summary = nlohmann::json::parse(io::read_file(out / "summary.json"));
  CHECK(summary.size() == 3);
}
