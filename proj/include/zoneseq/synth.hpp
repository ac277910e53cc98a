#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "zoneseq/ingest.hpp"

namespace zoneseq::synth {

struct GeoBox {
  double lat_min{33.90};
  double lat_max{34.20};
  double lng_min{-118.50};
  double lng_max{-118.10};
};

struct SynthConfig {
  std::uint64_t seed{42};
  std::size_t train_routes{200};
  std::size_t eval_routes{50};
  std::size_t zones_min{25};
  std::size_t zones_max{35};
  std::size_t stops_min{4};
  std::size_t stops_max{9};
  std::size_t zone_templates{8};
  // Probability that an adjacent template pair keeps its order; otherwise the
  // pair is ordered by a fair coin.
  double pattern_strength{0.95};
  GeoBox bbox;
  // Stop scatter around a zone centre.
  double cluster_sigma_m{120.0};
  // Distance between consecutive template zone centres.
  double zone_step_m{700.0};
  double speed_mps{8.0};
};

// Throws ConfigError.
void validate(const SynthConfig& config);

// Reads a JSON object whose keys mirror SynthConfig fields; absent keys keep
// their defaults. Throws ConfigError / IoError.
SynthConfig read_config(const std::filesystem::path& path);

struct SynthOutput {
  Dataset train;
  Dataset eval;
  // Zone order of every template.
  std::vector<ZoneSequence> templates;
  // Route id -> template order restricted to the route's zones.
  std::map<std::string, ZoneSequence> planted;
};

// Deterministic given config.seed.
SynthOutput generate(const SynthConfig& config);

// Writes <dir>/train and <dir>/eval in the ingest layout.
void write(const SynthOutput& output, const std::filesystem::path& dir);

} // namespace zoneseq::synth
