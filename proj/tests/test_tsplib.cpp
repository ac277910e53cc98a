#include <doctest.h>

#include <algorithm>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "zoneseq/tsplib.hpp"

using namespace zoneseq;
using namespace zoneseq::tsp;

namespace {

ZoneTspInstance instance_with(std::size_t n, std::vector<double> cost) {
  ZoneTspInstance inst;
  inst.nodes.push_back({static_cast<std::uint8_t>(static_cast<int>(NodeRole::LastStop) |
                                                  static_cast<int>(NodeRole::Depot)),
                        "ls", {}, {}});
  for (std::size_t i = 1; i < n; ++i) {
    inst.nodes.push_back({static_cast<std::uint8_t>(NodeRole::ZoneStop),
                          "s" + std::to_string(i), {}, {}});
  }
  inst.cost = std::move(cost);
  return inst;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::ranges::count(s, '\n'));
}

// Stand-in for a Lin-Kernighan binary: reads the parameter file and writes
// the reverse of the identity tour after the first node.
std::filesystem::path fake_solver(const std::filesystem::path& dir, int exit_code = 0) {
  const auto path = dir / "fake-lkh.sh";
  fixtures::write(path, R"(#!/bin/sh
tour=$(sed -n 's/^TOUR_FILE = //p' "$1")
prob=$(sed -n 's/^PROBLEM_FILE = //p' "$1")
dim=$(sed -n 's/^DIMENSION: //p' "$prob")
{
  echo "TOUR_SECTION"
  echo 1
  i=$dim
  while [ "$i" -gt 1 ]; do echo "$i"; i=$((i - 1)); done
  echo -1
  echo EOF
} > "$tour"
exit )" + std::to_string(exit_code) + "\n");
  std::filesystem::permissions(path, std::filesystem::perms::owner_all);
  return path;
}

} // namespace

TEST_CASE("two-node problem file") {
  const auto inst = instance_with(2, {0, 1.5, 2.25, 0});
  const std::string text = write_tsplib_atsp(inst, "tiny");
  CHECK(text ==
        "NAME: tiny\nTYPE: ATSP\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EXPLICIT\n"
        "EDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1500\n2250 0\nEOF\n");
  CHECK(line_count(text) == 9);
  CHECK(write_tsplib_atsp(inst, "tiny") == text);
}

TEST_CASE("weights round half to even") {
  // Each product below rounds to an exact .5 in binary.
  const auto inst = instance_with(3, {0, 0.0005, 0.0015, 0.0025, 0, 2.5, 1.2345, 0.0035, 0});
  const IntMatrix m = scaled_weights(inst);
  CHECK(m.weights[1] == 0);    // 0.5 -> 0
  CHECK(m.weights[2] == 2);    // 1.5 -> 2
  CHECK(m.weights[3] == 2);    // 2.5 -> 2
  CHECK(m.weights[5] == 2500);
  CHECK(m.weights[6] == 1234); // 1234.5 -> 1234
  CHECK(m.weights[7] == 4);    // 3.5 -> 4
}

TEST_CASE("problem file round trip") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 5000);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng() % 20;
    std::vector<double> c(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        c[i * n + j] = i == j ? 0 : u(rng);
      }
    }
    const auto inst = instance_with(n, c);
    CHECK(parse_tsplib_atsp(write_tsplib_atsp(inst)) == scaled_weights(inst));
  }
  CHECK_THROWS_AS(parse_tsplib_atsp("TYPE: TSP\nDIMENSION: 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_tsplib_atsp("DIMENSION: 2\nEDGE_WEIGHT_SECTION\n0 1\n"),
                  ValidationError);
}

TEST_CASE("tour parsing") {
  CHECK(parse_tsplib_tour("NAME: x\nTOUR_SECTION\n1\n3\n2\n-1\nEOF\n", 3) ==
        TourOrder{0, 2, 1});
  CHECK_THROWS_AS(parse_tsplib_tour("TOUR_SECTION\n1\n2\n-1\n", 3), ValidationError);
  CHECK_THROWS_AS(parse_tsplib_tour("TOUR_SECTION\n1\n1\n2\n-1\n", 3), ValidationError);
  CHECK_THROWS_AS(parse_tsplib_tour("TOUR_SECTION\n1\n4\n2\n-1\n", 3), ValidationError);
  CHECK_THROWS_AS(parse_tsplib_tour("1\n2\n3\n-1\n", 3), ValidationError);
}

TEST_CASE("parameter file") {
  const std::string p = write_solver_parameters("/tmp/a.atsp", "/tmp/a.tour", 9);
  CHECK(p == "PROBLEM_FILE = /tmp/a.atsp\nTOUR_FILE = /tmp/a.tour\nRUNS = 1\nSEED = 9\n");
}

TEST_CASE("external solver adapter") {
  const auto dir = fixtures::temp_dir("lkh");
  const auto inst = instance_with(4, {0, 1, 2, 3, 4, 0, 5, 6, 7, 8, 0, 9, 1, 2, 3, 0});
  const ExternalSolver solver(fake_solver(dir), dir);
  CHECK(solver.solve(inst, 1) == TourOrder{0, 3, 2, 1});
  // Only the per-job directory is created and it is cleaned up.
  CHECK(std::distance(std::filesystem::directory_iterator(dir),
                      std::filesystem::directory_iterator()) == 1);

  // The tour goes through the same post-processing as the built-in solver.
  CHECK(order_zone_stops(inst, solver.solve(inst, 1)) ==
        std::vector<std::string>{"s3", "s2", "s1"});

  const ExternalSolver failing(fake_solver(fixtures::temp_dir("lkh-fail"), 3));
  CHECK_THROWS_AS(failing.solve(inst, 1), IoError);
  const ExternalSolver missing(dir / "does-not-exist");
  CHECK_THROWS_AS(missing.solve(inst, 1), IoError);
}
