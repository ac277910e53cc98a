#include "zoneseq/ppm.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>

#include "zoneseq/io.hpp"

namespace zoneseq::ppm {

namespace {

constexpr std::string_view magic = "ZPPM";
constexpr std::uint16_t format_version = 1;

bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Mutable trie used while counting; frozen into a ComponentModel.
class TrieBuilder {
public:
  TokenId intern(std::string_view token) {
    const auto [it, inserted] =
      _ids.try_emplace(std::string(token), static_cast<TokenId>(_names.size()));
    if (inserted) {
      _names.push_back(it->first);
    }
    return it->second;
  }

  // Adds `count` to `next` in every context order 0..depth along `history`
  // (oldest first; the newest entries form the context).
  void add_all_orders(std::span<const TokenId> history,
                      std::size_t depth,
                      TokenId next,
                      std::uint64_t count) {
    std::uint32_t node = 0;
    bump(node, next, count);
    for (std::size_t j = 1; j <= depth; ++j) {
      node = child(node, history[history.size() - j]);
      bump(node, next, count);
    }
  }

  // Adds `count` at exactly the node for `context` (oldest first).
  void add_exact(std::span<const TokenId> context, TokenId next,
                 std::uint64_t count) {
    std::uint32_t node = 0;
    for (std::size_t j = 1; j <= context.size(); ++j) {
      node = child(node, context[context.size() - j]);
    }
    bump(node, next, count);
  }

  ComponentModel freeze() const {
    std::vector<std::uint32_t> order(_names.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) {
      order[i] = i;
    }
    std::ranges::sort(order, {}, [this](std::uint32_t i) -> const std::string& {
      return _names[i];
    });
    std::vector<TokenId> remap(_names.size());
    std::vector<std::string> vocab(_names.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
      remap[order[rank]] = rank;
      vocab[rank] = _names[order[rank]];
    }

    std::vector<ComponentModel::Node> nodes(_nodes.size());
    for (std::size_t i = 0; i < _nodes.size(); ++i) {
      const auto& b = _nodes[i];
      auto& n = nodes[i];
      n.parent = b.parent;
      n.edge = b.edge == unknown_token ? unknown_token : remap[b.edge];
      for (const auto& [tok, c] : b.children) {
        n.children.emplace_back(remap[tok], c);
      }
      for (const auto& [tok, c] : b.successors) {
        n.successors.emplace_back(remap[tok], c);
        n.total += c;
      }
      std::ranges::sort(n.children);
      std::ranges::sort(n.successors);
    }
    return ComponentModel(std::move(vocab), std::move(nodes));
  }

private:
  struct BuildNode {
    std::unordered_map<TokenId, std::uint32_t> children;
    std::unordered_map<TokenId, std::uint64_t> successors;
    std::uint32_t parent{0};
    TokenId edge{unknown_token};
  };

  std::uint32_t child(std::uint32_t node, TokenId token) {
    const auto it = _nodes[node].children.find(token);
    if (it != _nodes[node].children.end()) {
      return it->second;
    }
    const auto id = static_cast<std::uint32_t>(_nodes.size());
    _nodes[node].children.emplace(token, id);
    _nodes.push_back({{}, {}, node, token});
    return id;
  }

  void bump(std::uint32_t node, TokenId next, std::uint64_t count) {
    _nodes[node].successors[next] += count;
  }

  std::unordered_map<std::string, TokenId> _ids;
  std::vector<std::string> _names;
  std::vector<BuildNode> _nodes{1};
};

// Little-endian encoding helpers for the model file.
class Writer {
public:
  void bytes(std::string_view s) { _out.append(s); }
  template <typename T> void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      _out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
  }
  void real(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  std::string take() { return std::move(_out); }

private:
  std::string _out;
};

class Reader {
public:
  explicit Reader(std::string_view in) : _in(in) {}

  std::string_view bytes(std::size_t n) {
    if (_in.size() - _pos < n) {
      throw ValidationError("model file truncated");
    }
    const auto out = _in.substr(_pos, n);
    _pos += n;
    return out;
  }
  template <typename T> T uint() {
    const auto b = bytes(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(b[i])) << (8 * i);
    }
    return v;
  }
  double real() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string str() { return std::string(bytes(uint<std::uint32_t>())); }
  bool done() const { return _pos == _in.size(); }

private:
  std::string_view _in;
  std::size_t _pos{0};
};

} // namespace

ZoneComponents tokenize_zone(std::string_view zone_id) {
  if (zone_id.empty()) {
    throw ValidationError("cannot tokenize an empty zone id");
  }
  ZoneComponents out;
  out.parts[0] = std::string(zone_id);
  std::size_t slot = 1;
  std::size_t i = 0;
  while (i < zone_id.size() && slot < component_count) {
    if (!is_alnum(zone_id[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < zone_id.size() && is_alnum(zone_id[i])) {
      ++i;
    }
    out.parts[slot++] = std::string(zone_id.substr(start, i - start));
  }
  for (; slot < component_count; ++slot) {
    out.parts[slot] = std::string(empty_token);
  }
  return out;
}

void validate_weights(const Weights& w) {
  double sum = 0.0;
  for (const double x : w) {
    if (!std::isfinite(x) || x < 0.0) {
      throw ConfigError("component weights must be finite and non-negative");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ConfigError("component weights must sum to 1");
  }
}

ComponentModel::ComponentModel(std::vector<std::string> vocab,
                               std::vector<Node> nodes)
  : _tokens(std::move(vocab)), _nodes(std::move(nodes)) {
  if (_nodes.empty()) {
    _nodes.emplace_back();
  }
}

TokenId ComponentModel::token_id(std::string_view token) const {
  const auto it = std::ranges::lower_bound(_tokens, token);
  if (it == _tokens.end() || *it != token) {
    return unknown_token;
  }
  return static_cast<TokenId>(it - _tokens.begin());
}

namespace {

template <typename Pairs>
auto find_token(const Pairs& pairs, TokenId token) {
  const auto it = std::ranges::lower_bound(
    pairs, token, {}, [](const auto& p) { return p.first; });
  return (it != pairs.end() && it->first == token) ? it : pairs.end();
}

} // namespace

const ComponentModel::Node*
ComponentModel::find(std::span<const TokenId> context) const {
  std::uint32_t node = 0;
  for (std::size_t j = 1; j <= context.size(); ++j) {
    const auto& children = _nodes[node].children;
    const auto it = find_token(children, context[context.size() - j]);
    if (it == children.end()) {
      return nullptr;
    }
    node = it->second;
  }
  return &_nodes[node];
}

std::vector<TokenId> ComponentModel::context_of(std::uint32_t node) const {
  std::vector<TokenId> ctx;
  while (node != 0) {
    ctx.push_back(_nodes[node].edge);
    node = _nodes[node].parent;
  }
  // Walking up yields oldest first already: the deepest edge is the oldest.
  return ctx;
}

double ComponentModel::prob(std::span<const TokenId> context,
                            TokenId candidate,
                            std::size_t max_order) const {
  const std::size_t depth = std::min(context.size(), max_order);
  // Path of existing context nodes, longest last.
  std::array<std::uint32_t, 64> path{};
  std::vector<std::uint32_t> long_path;
  std::uint32_t* p = path.data();
  if (depth + 1 > path.size()) {
    long_path.resize(depth + 1);
    p = long_path.data();
  }
  std::size_t len = 0;
  p[len++] = 0;
  for (std::size_t j = 1; j <= depth; ++j) {
    const TokenId tok = context[context.size() - j];
    if (tok == unknown_token) {
      break;
    }
    const auto& children = _nodes[p[len - 1]].children;
    const auto it = find_token(children, tok);
    if (it == children.end()) {
      break;
    }
    p[len++] = it->second;
  }

  double escape = 1.0;
  for (std::size_t j = len; j-- > 0;) {
    const Node& node = _nodes[p[j]];
    if (node.total == 0) {
      continue;
    }
    const double two_t = 2.0 * static_cast<double>(node.total);
    if (candidate != unknown_token) {
      const auto it = find_token(node.successors, candidate);
      if (it != node.successors.end()) {
        return escape * (2.0 * static_cast<double>(it->second) - 1.0) / two_t;
      }
    }
    escape *= static_cast<double>(node.successors.size()) / two_t;
  }
  return escape / static_cast<double>(alphabet_size() + 1);
}

PpmModel PpmModel::train(std::span<const ZoneSequence> corpus,
                         const TrainOptions& options) {
  if (corpus.empty()) {
    throw ValidationError("cannot train on an empty corpus");
  }
  if (options.max_order < 1) {
    throw ConfigError("max order must be at least 1");
  }
  validate_weights(options.weights);

  std::array<TrieBuilder, component_count> builders;
  // Tokenize each distinct zone once.
  std::unordered_map<std::string, EncodedZone> cache;
  auto encode = [&](const std::string& zone) -> const EncodedZone& {
    auto it = cache.find(zone);
    if (it == cache.end()) {
      const auto parts = tokenize_zone(zone);
      EncodedZone enc{};
      for (std::size_t k = 0; k < component_count; ++k) {
        enc[k] = builders[k].intern(parts[k]);
      }
      it = cache.emplace(zone, enc).first;
    }
    return it->second;
  };

  std::vector<EncodedZone> stream;
  std::array<std::vector<TokenId>, component_count> streams;
  for (const ZoneSequence& seq : corpus) {
    stream.clear();
    if (options.prepend_sentinel) {
      stream.push_back(encode(std::string(depot_zone)));
    }
    for (const auto& z : seq.zones) {
      stream.push_back(encode(z));
    }
    const std::size_t first = options.prepend_sentinel ? 1 : 0;
    for (std::size_t k = 0; k < component_count; ++k) {
      auto& s = streams[k];
      s.clear();
      for (const auto& e : stream) {
        s.push_back(e[k]);
      }
      for (std::size_t i = first; i < s.size(); ++i) {
        const std::size_t depth = std::min(options.max_order, i);
        builders[k].add_all_orders(std::span(s).first(i), depth, s[i], 1);
      }
    }
  }

  PpmModel model;
  model._max_order = options.max_order;
  model._weights = options.weights;
  for (std::size_t k = 0; k < component_count; ++k) {
    model._components[k] = builders[k].freeze();
  }
  return model;
}

PpmModel PpmModel::with_weights(const Weights& w) const {
  validate_weights(w);
  PpmModel out = *this;
  out._weights = w;
  return out;
}

EncodedZone PpmModel::encode(std::string_view zone_id) const {
  const auto parts = tokenize_zone(zone_id);
  EncodedZone enc{};
  for (std::size_t k = 0; k < component_count; ++k) {
    enc[k] = _components[k].token_id(parts[k]);
  }
  return enc;
}

double PpmModel::prob(std::span<const EncodedZone> context,
                      const EncodedZone& candidate) const {
  const std::size_t used = std::min(context.size(), _max_order);
  const auto tail = context.last(used);
  std::array<TokenId, 64> buf{};
  std::vector<TokenId> big;
  TokenId* ctx = buf.data();
  if (used > buf.size()) {
    big.resize(used);
    ctx = big.data();
  }
  double p = 0.0;
  for (std::size_t k = 0; k < component_count; ++k) {
    if (_weights[k] == 0.0) {
      continue;
    }
    for (std::size_t i = 0; i < used; ++i) {
      ctx[i] = tail[i][k];
    }
    p += _weights[k] *
         _components[k].prob(std::span(ctx, used), candidate[k], _max_order);
  }
  return p;
}

double PpmModel::prob(std::span<const std::string> context,
                      std::string_view candidate) const {
  const std::size_t used = std::min(context.size(), _max_order);
  std::vector<EncodedZone> enc;
  enc.reserve(used);
  for (const auto& z : context.last(used)) {
    enc.push_back(encode(z));
  }
  return prob(enc, encode(candidate));
}

std::uint64_t PpmModel::count(std::size_t k,
                              std::span<const std::string> context,
                              std::string_view token) const {
  const auto& comp = _components.at(k);
  std::vector<TokenId> ctx;
  for (const auto& c : context) {
    ctx.push_back(comp.token_id(c));
    if (ctx.back() == unknown_token) {
      return 0;
    }
  }
  const auto* node = comp.find(ctx);
  const TokenId tok = comp.token_id(token);
  if (node == nullptr || tok == unknown_token) {
    return 0;
  }
  const auto it = find_token(node->successors, tok);
  return it == node->successors.end() ? 0 : it->second;
}

std::vector<ContextStats> PpmModel::contexts(std::size_t k) const {
  const auto& comp = _components.at(k);
  std::vector<ContextStats> out;
  const auto nodes = comp.nodes();
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    ContextStats stats;
    for (const TokenId t : comp.context_of(i)) {
      stats.context.push_back(comp.tokens()[t]);
    }
    for (const auto& [t, c] : nodes[i].successors) {
      stats.successors.emplace_back(comp.tokens()[t], c);
    }
    stats.total = nodes[i].total;
    out.push_back(std::move(stats));
  }
  return out;
}

std::string PpmModel::serialize() const {
  Writer w;
  w.bytes(magic);
  w.uint(format_version);
  w.uint(static_cast<std::uint32_t>(_max_order));
  for (const double x : _weights) {
    w.real(x);
  }
  for (const auto& comp : _components) {
    w.uint(static_cast<std::uint32_t>(comp.tokens().size()));
    for (const auto& t : comp.tokens()) {
      w.str(t);
    }
    struct Triple {
      std::vector<TokenId> context;
      TokenId token;
      std::uint64_t count;
    };
    std::vector<Triple> triples;
    const auto nodes = comp.nodes();
    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
      const auto ctx = comp.context_of(i);
      for (const auto& [t, c] : nodes[i].successors) {
        triples.push_back({ctx, t, c});
      }
    }
    std::ranges::sort(triples, [](const Triple& a, const Triple& b) {
      return std::tie(a.context, a.token) < std::tie(b.context, b.token);
    });
    w.uint(static_cast<std::uint64_t>(triples.size()));
    for (const auto& t : triples) {
      w.uint(static_cast<std::uint32_t>(t.context.size()));
      for (const TokenId c : t.context) {
        w.uint(c);
      }
      w.uint(t.token);
      w.uint(t.count);
    }
  }
  return w.take();
}

PpmModel PpmModel::deserialize(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(magic.size()) != magic) {
    throw ValidationError("not a zone PPM model file (bad magic)");
  }
  const auto version = r.uint<std::uint16_t>();
  if (version != format_version) {
    throw ValidationError("unsupported model format version " +
                          std::to_string(version));
  }
  PpmModel model;
  model._max_order = r.uint<std::uint32_t>();
  if (model._max_order < 1) {
    throw ValidationError("model file has max order 0");
  }
  for (double& x : model._weights) {
    x = r.real();
  }
  try {
    validate_weights(model._weights);
  } catch (const ConfigError& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
  for (auto& comp : model._components) {
    TrieBuilder builder;
    const auto n_tokens = r.uint<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_tokens; ++i) {
      builder.intern(r.str());
    }
    const auto n_triples = r.uint<std::uint64_t>();
    std::vector<TokenId> ctx;
    for (std::uint64_t i = 0; i < n_triples; ++i) {
      ctx.resize(r.uint<std::uint32_t>());
      if (ctx.size() > model._max_order) {
        throw ValidationError("model file context longer than max order");
      }
      for (auto& c : ctx) {
        c = r.uint<std::uint32_t>();
        if (c >= n_tokens) {
          throw ValidationError("model file token index out of range");
        }
      }
      const auto tok = r.uint<std::uint32_t>();
      const auto count = r.uint<std::uint64_t>();
      if (tok >= n_tokens || count == 0) {
        throw ValidationError("model file has an invalid count triple");
      }
      builder.add_exact(ctx, tok, count);
    }
    comp = builder.freeze();
  }
  if (!r.done()) {
    throw ValidationError("model file has trailing bytes");
  }
  return model;
}

void PpmModel::save(const std::filesystem::path& path) const {
  io::write_file_atomic(path, serialize());
}

PpmModel PpmModel::load(const std::filesystem::path& path) {
  return deserialize(io::read_file(path));
}

double seq_reward(const PpmModel& model,
                  const ZoneSequence& zseq,
                  Objective objective) {
  std::vector<EncodedZone> ctx;
  ctx.reserve(zseq.zones.size() + 1);
  ctx.push_back(model.encode(depot_zone));
  double total = 0.0;
  for (const auto& z : zseq.zones) {
    const EncodedZone enc = model.encode(z);
    total += reward(model.prob(ctx, enc), objective);
    ctx.push_back(enc);
  }
  return total;
}

} // namespace zoneseq::ppm
