#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "zoneseq/ppm.hpp"

namespace zoneseq::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_validation = 1,
  exit_io = 2,
  exit_config = 3,
};

// Resolved settings for one command. Sources are layered as
// command-line flag > ZSEQ_* environment variable > JSON config > default.
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path model;
  std::filesystem::path out;
  std::filesystem::path submission;
  std::filesystem::path synth_config;
  std::optional<std::filesystem::path> external_solver;
  std::size_t order{ppm::default_max_order};
  ppm::Weights weights{ppm::default_weights};
  std::size_t threads{1};
  std::uint64_t seed{42};
  bool seed_given{false};
  std::string log_level{"info"};
  bool include_low{false};
  bool per_route_timing{false};
  bool log_space{false};
};

// Parses "w0,w1,w2,w3". Throws ConfigError.
ppm::Weights parse_weights(std::string_view text);

// Throws ConfigError.
void validate(const RunConfig& config);

int cmd_train(const RunConfig& config);
int cmd_sequence(const RunConfig& config);
int cmd_evaluate(const RunConfig& config);
int cmd_synth(const RunConfig& config);
int cmd_bench(const RunConfig& config);

// Entry point of the `zoneseq` binary; returns the process exit code.
int run(int argc, const char* const* argv);

} // namespace zoneseq::cli
