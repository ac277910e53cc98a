#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zoneseq/core.hpp"

namespace zoneseq::ppm {

inline constexpr std::size_t component_count = 4;
// Padding for zone ids with fewer than three alphanumeric tokens.
inline constexpr std::string_view empty_token = "\xE2\x88\x85"; // U+2205

// c0 is the full zone id, c1..c3 the first three maximal alphanumeric runs.
// "C-17.3D" -> {"C-17.3D", "C", "17", "3D"}.
struct ZoneComponents {
  std::array<std::string, component_count> parts;

  const std::string& operator[](std::size_t k) const { return parts[k]; }
  friend bool operator==(const ZoneComponents&, const ZoneComponents&) = default;
};

// Throws ValidationError on an empty id.
ZoneComponents tokenize_zone(std::string_view zone_id);

using TokenId = std::uint32_t;
inline constexpr TokenId unknown_token = std::numeric_limits<TokenId>::max();

// Per-component token ids of one zone; unknown_token for unseen tokens.
using EncodedZone = std::array<TokenId, component_count>;

using Weights = std::array<double, component_count>;

inline constexpr Weights default_weights{0.25, 0.25, 0.25, 0.25};
inline constexpr std::size_t default_max_order = 5;

struct TrainOptions {
  std::size_t max_order{default_max_order};
  Weights weights{default_weights};
  // Prepend the depot sentinel "stz" to every sequence as start context.
  bool prepend_sentinel{true};
};

// Throws ConfigError unless all weights are finite, >= 0, and sum to 1.
void validate_weights(const Weights& w);

// Successor statistics of one context, for inspection and tests.
struct ContextStats {
  // Oldest token first.
  std::vector<std::string> context;
  std::vector<std::pair<std::string, std::uint64_t>> successors;
  std::uint64_t total{0};
};

// Variable-order model over a single token stream, stored as a suffix trie:
// the root is the empty context and each edge prepends one older token.
class ComponentModel {
public:
  struct Node {
    // Sorted by token.
    std::vector<std::pair<TokenId, std::uint32_t>> children;
    std::vector<std::pair<TokenId, std::uint64_t>> successors;
    std::uint64_t total{0};
    std::uint32_t parent{0};
    TokenId edge{unknown_token};
  };

  ComponentModel() = default;
  ComponentModel(std::vector<std::string> vocab, std::vector<Node> nodes);

  // PPM-D estimate of `candidate` after `context` (oldest first), backing off
  // one order per escape and bottoming out in a uniform 1/(|V|+1).
  double prob(std::span<const TokenId> context,
              TokenId candidate,
              std::size_t max_order) const;

  TokenId token_id(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return _tokens; }
  // Distinct tokens ever predicted, i.e. |V|.
  std::size_t alphabet_size() const { return _nodes.front().successors.size(); }
  std::span<const Node> nodes() const { return _nodes; }

  // Context trie node for `context` (oldest first), if present.
  const Node* find(std::span<const TokenId> context) const;
  std::vector<TokenId> context_of(std::uint32_t node) const;

private:
  std::vector<std::string> _tokens; // sorted
  std::vector<Node> _nodes;         // _nodes[0] is the root
};

class PpmModel {
public:
  PpmModel() = default;

  // Throws ValidationError on an empty corpus, ConfigError on bad options.
  static PpmModel train(std::span<const ZoneSequence> corpus,
                        const TrainOptions& options = {});

  std::size_t max_order() const { return _max_order; }
  const Weights& weights() const { return _weights; }
  const ComponentModel& component(std::size_t k) const { return _components[k]; }

  // Same counts, different component weights.
  PpmModel with_weights(const Weights& w) const;

  EncodedZone encode(std::string_view zone_id) const;

  // Weighted sum of the component estimates. Only the last max_order context
  // entries are used. Always strictly positive.
  double prob(std::span<const EncodedZone> context,
              const EncodedZone& candidate) const;
  double prob(std::span<const std::string> context,
              std::string_view candidate) const;

  // Count of `token` after `context` in component k (0 when absent).
  std::uint64_t count(std::size_t k,
                      std::span<const std::string> context,
                      std::string_view token) const;
  std::vector<ContextStats> contexts(std::size_t k) const;

  // Versioned binary format, see docs/model_format.md. Identical models
  // serialize to identical bytes.
  std::string serialize() const;
  static PpmModel deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static PpmModel load(const std::filesystem::path& path);

  friend bool operator==(const PpmModel& a, const PpmModel& b) {
    return a.serialize() == b.serialize();
  }

private:
  std::size_t _max_order{default_max_order};
  Weights _weights{default_weights};
  std::array<ComponentModel, component_count> _components;
};

enum class Objective { Probability, LogProbability };

// g(context, candidate) under the chosen objective.
inline double reward(double p, Objective objective) {
  return objective == Objective::Probability ? p : std::log(p);
}

// Sum of prob over the sequence, each zone conditioned on its predecessors
// (with the "stz" prefix) truncated to the model order.
double seq_reward(const PpmModel& model,
                  const ZoneSequence& zseq,
                  Objective objective = Objective::Probability);

} // namespace zoneseq::ppm
