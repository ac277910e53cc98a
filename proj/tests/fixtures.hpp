#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "zoneseq/core.hpp"
#include "zoneseq/io.hpp"

namespace fixtures {

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() /
             ("zoneseq-test-" + name + "-" + std::to_string(rd()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write(const std::filesystem::path& p, const std::string& text) {
  zoneseq::io::write_file_atomic(p, text);
}

inline zoneseq::Stop stop(std::string id, double lat, double lng,
                          std::optional<std::string> zone = std::nullopt) {
  return {std::move(id), {lat, lng}, std::move(zone), zoneseq::StopKind::Delivery};
}

inline zoneseq::Stop depot(double lat = 0.0, double lng = 0.0,
                           std::string id = "depot") {
  return {std::move(id), {lat, lng}, std::nullopt, zoneseq::StopKind::Depot};
}

} // namespace fixtures
