#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "zoneseq/tsp.hpp"

namespace zoneseq::tsp {

// Costs are written as round-half-even(cost * weight_scale) integers.
inline constexpr double weight_scale = 1000.0;

struct IntMatrix {
  std::size_t dimension{0};
  std::vector<long long> weights; // row-major

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;
};

// TSPLIB ATSP problem with an EXPLICIT FULL_MATRIX section. Byte-exact for a
// given instance.
std::string write_tsplib_atsp(const ZoneTspInstance& instance,
                              std::string_view name = "zone");

// Inverse of write_tsplib_atsp for the fields it emits. Throws ValidationError.
IntMatrix parse_tsplib_atsp(std::string_view text);

// Scaled integer weights exactly as write_tsplib_atsp emits them.
IntMatrix scaled_weights(const ZoneTspInstance& instance);

// LKH-style parameter file.
std::string write_solver_parameters(const std::filesystem::path& problem,
                                    const std::filesystem::path& tour,
                                    std::uint64_t seed);

// TOUR_SECTION of 1-based node numbers terminated by -1. Throws
// ValidationError unless it lists a permutation of `dimension` nodes.
TourOrder parse_tsplib_tour(std::string_view text, std::size_t dimension);

// Runs an external Lin-Kernighan style binary as `<path> <parameter file>`.
// The last-stop node is always node 1 of the problem file.
class ExternalSolver final : public AtspSolver {
public:
  explicit ExternalSolver(std::filesystem::path executable,
                          std::filesystem::path work_dir = {});

  // Throws IoError if the binary fails or produces no tour.
  TourOrder solve(const ZoneTspInstance& instance,
                  std::uint64_t seed) const override;

private:
  std::filesystem::path _exe;
  std::filesystem::path _work_dir;
};

} // namespace zoneseq::tsp
