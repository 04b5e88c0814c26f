#pragma once

#include "ctplab/rational.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ctplab {

using VertexId = std::size_t;
using EdgeId = std::size_t;

/// Malformed instance or a violated model invariant.
class InstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An enumeration or search would exceed its configured budget.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, std::size_t required, std::size_t allowed)
      : std::runtime_error(what + ": requires " + (required == kUnbounded ? std::string("more than ") + std::to_string(allowed)
                                                                          : std::to_string(required)) +
                           ", allowed " + std::to_string(allowed)),
        required_(required),
        allowed_(allowed) {}
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();
  std::size_t required() const { return required_; }
  std::size_t allowed() const { return allowed_; }

 private:
  std::size_t required_;
  std::size_t allowed_;
};

inline constexpr std::size_t kDefaultWeatherCap = std::size_t{1} << 20;

enum class EdgeStatus : std::uint8_t { Unknown = 0, Traversable = 1, Blocked = 2 };

inline char status_char(EdgeStatus s) {
  switch (s) {
    case EdgeStatus::Traversable: return 'T';
    case EdgeStatus::Blocked: return 'B';
    default: return '?';
  }
}

struct EdgeSpec {
  std::string id;
  VertexId tail = 0;
  VertexId head = 0;
  bool directed = false;
  Cost cost;
  Rational block_p;

  bool uncertain() const { return block_p.sign() > 0 && block_p < Rational(1); }
  /// Status when the prior already decides it.
  std::optional<EdgeStatus> forced_status() const {
    if (block_p.is_zero()) return EdgeStatus::Traversable;
    if (block_p == Rational(1)) return EdgeStatus::Blocked;
    return std::nullopt;
  }
  bool incident(VertexId v) const { return tail == v || head == v; }
  bool usable_from(VertexId v) const { return tail == v || (!directed && head == v); }
  VertexId other(VertexId v) const { return v == tail ? head : tail; }
};

/// One binary variable of the dependency network. Value 1 on an edge variable means Blocked.
struct NetVariable {
  std::string name;
  std::optional<EdgeId> edge;
  std::vector<std::size_t> parents;
  /// Row index encodes the parent assignment, parent k at bit k. Each row is {P(0), P(1)}.
  std::vector<std::array<Rational, 2>> cpt;
};

struct DependencyNet {
  std::size_t max_in_degree = 3;
  std::vector<NetVariable> variables;

  std::size_t add(NetVariable v) {
    variables.push_back(std::move(v));
    return variables.size() - 1;
  }
  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (variables[i].name == name) return i;
    return std::nullopt;
  }

  /// Kahn order; throws InstanceError on a cycle.
  std::vector<std::size_t> topological_order() const {
    std::vector<std::size_t> indeg(variables.size(), 0);
    std::vector<std::vector<std::size_t>> children(variables.size());
    for (std::size_t i = 0; i < variables.size(); ++i)
      for (auto p : variables[i].parents) {
        if (p >= variables.size()) throw InstanceError("dependency variable '" + variables[i].name + "' has an unknown parent");
        children[p].push_back(i);
        ++indeg[i];
      }
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (indeg[i] == 0) ready.push_back(i);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
      auto i = ready.front();
      ready.pop_front();
      order.push_back(i);
      for (auto c : children[i])
        if (--indeg[c] == 0) ready.push_back(c);
    }
    if (order.size() != variables.size()) throw InstanceError("dependency network has a cycle");
    return order;
  }
};

/// Deterministic CPT rows for a variable equal to (or the negation of) its single parent.
inline std::vector<std::array<Rational, 2>> copy_cpt(bool negate) {
  if (negate) return {{Rational(0), Rational(1)}, {Rational(1), Rational(0)}};
  return {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
}
inline std::vector<std::array<Rational, 2>> coin_cpt(const Rational& p_one) { return {{Rational(1) - p_one, p_one}}; }
inline std::vector<std::array<Rational, 2>> xor_cpt() {
  return {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}, {Rational(0), Rational(1)}, {Rational(1), Rational(0)}};
}

/// (vertex, edge) -> sensing cost. Absent entries mean sensing is unavailable.
struct SensingCostMap {
  std::map<std::pair<VertexId, EdgeId>, Cost> entries;

  Cost lookup(VertexId v, EdgeId e) const {
    auto it = entries.find({v, e});
    return it == entries.end() ? Cost::infinite() : it->second;
  }
};

enum class Variant { Independent, Dependent, Sensing };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Independent: return "independent";
    case Variant::Dependent: return "dependent";
    case Variant::Sensing: return "sensing";
  }
  return "?";
}

class Instance {
 public:
  Instance() = default;

  VertexId add_vertex(const std::string& name) {
    if (name.empty()) throw InstanceError("empty vertex name");
    if (vertex_index_.count(name)) throw InstanceError("duplicate vertex '" + name + "'");
    vertex_index_.emplace(name, vertices_.size());
    vertices_.push_back(name);
    incident_.emplace_back();
    return vertices_.size() - 1;
  }

  /// Adds the vertex unless a vertex of that name exists.
  VertexId ensure_vertex(const std::string& name) {
    if (auto v = find_vertex(name)) return *v;
    return add_vertex(name);
  }

  EdgeId add_edge(EdgeSpec spec) {
    if (spec.id.empty()) spec.id = "e" + std::to_string(edges_.size());
    if (edge_index_.count(spec.id)) throw InstanceError("duplicate edge '" + spec.id + "'");
    if (spec.tail >= vertices_.size() || spec.head >= vertices_.size())
      throw InstanceError("edge '" + spec.id + "' has a dangling endpoint");
    EdgeId id = edges_.size();
    edge_index_.emplace(spec.id, id);
    incident_[spec.tail].push_back(id);
    if (spec.head != spec.tail) incident_[spec.head].push_back(id);
    edges_.push_back(std::move(spec));
    return id;
  }

  EdgeId add_edge(const std::string& id, const std::string& tail, const std::string& head, Cost cost,
                  Rational block_p = Rational(0), bool directed = false) {
    return add_edge(EdgeSpec{id, vertex(tail), vertex(head), directed, std::move(cost), std::move(block_p)});
  }

  std::optional<VertexId> find_vertex(const std::string& name) const {
    auto it = vertex_index_.find(name);
    if (it == vertex_index_.end()) return std::nullopt;
    return it->second;
  }
  VertexId vertex(const std::string& name) const {
    auto v = find_vertex(name);
    if (!v) throw InstanceError("unknown vertex '" + name + "'");
    return *v;
  }
  std::optional<EdgeId> find_edge(const std::string& name) const {
    auto it = edge_index_.find(name);
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
  }
  EdgeId edge(const std::string& name) const {
    auto e = find_edge(name);
    if (!e) throw InstanceError("unknown edge '" + name + "'");
    return *e;
  }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::string& vertex_name(VertexId v) const { return vertices_.at(v); }
  const std::vector<std::string>& vertex_names() const { return vertices_; }
  const EdgeSpec& edge_spec(EdgeId e) const { return edges_.at(e); }
  const std::vector<EdgeSpec>& edges() const { return edges_; }
  const std::vector<EdgeId>& incident(VertexId v) const { return incident_.at(v); }

  void set_edge_cost(EdgeId e, Cost c) { edges_.at(e).cost = std::move(c); }
  void set_edge_block_p(EdgeId e, Rational p) { edges_.at(e).block_p = std::move(p); }

  VertexId source() const { return source_; }
  VertexId target() const { return target_; }
  void set_source(VertexId v) { source_ = v; }
  void set_target(VertexId v) { target_ = v; }
  void set_terminals(const std::string& s, const std::string& t) {
    source_ = vertex(s);
    target_ = vertex(t);
  }

  Variant variant() const { return variant_; }
  void set_variant(Variant v) { variant_ = v; }

  const DependencyNet& dependency() const { return dependency_; }
  DependencyNet& dependency() { return dependency_; }
  const SensingCostMap& sensing() const { return sensing_; }
  SensingCostMap& sensing() { return sensing_; }

  std::vector<EdgeId> uncertain_edges() const {
    std::vector<EdgeId> out;
    for (EdgeId e = 0; e < edges_.size(); ++e)
      if (edges_[e].uncertain()) out.push_back(e);
    return out;
  }

  std::size_t degree(VertexId v) const { return incident_.at(v).size(); }

 private:
  std::vector<std::string> vertices_;
  std::vector<EdgeSpec> edges_;
  std::vector<std::vector<EdgeId>> incident_;
  std::unordered_map<std::string, VertexId> vertex_index_;
  std::unordered_map<std::string, EdgeId> edge_index_;
  VertexId source_ = 0;
  VertexId target_ = 0;
  Variant variant_ = Variant::Independent;
  DependencyNet dependency_;
  SensingCostMap sensing_;
};

namespace detail {

inline bool reachable_when_open(const Instance& inst) {
  std::vector<char> seen(inst.vertex_count(), 0);
  std::deque<VertexId> todo{inst.source()};
  seen[inst.source()] = 1;
  while (!todo.empty()) {
    auto v = todo.front();
    todo.pop_front();
    if (v == inst.target()) return true;
    for (auto e : inst.incident(v)) {
      const auto& spec = inst.edge_spec(e);
      if (!spec.usable_from(v) || spec.block_p == Rational(1) || spec.cost.is_infinite()) continue;
      auto w = spec.other(v);
      if (!seen[w]) {
        seen[w] = 1;
        todo.push_back(w);
      }
    }
  }
  return false;
}

}  // namespace detail

/// Checks every model invariant and returns the instance unchanged on success.
inline Instance validate_instance(const Instance& raw) {
  if (raw.vertex_count() == 0) throw InstanceError("instance has no vertices");
  if (raw.source() >= raw.vertex_count() || raw.target() >= raw.vertex_count())
    throw InstanceError("source or target is not a vertex");
  if (raw.source() == raw.target()) throw InstanceError("source equals target");
  for (const auto& e : raw.edges()) {
    if (e.tail >= raw.vertex_count() || e.head >= raw.vertex_count())
      throw InstanceError("edge '" + e.id + "' has a dangling endpoint");
    if (e.tail == e.head) throw InstanceError("edge '" + e.id + "' is a self-loop");
    if (e.block_p.sign() < 0 || e.block_p > Rational(1))
      throw InstanceError("edge '" + e.id + "': probability out of range");
  }

  if (raw.variant() == Variant::Dependent) {
    const auto& net = raw.dependency();
    net.topological_order();
    std::vector<int> coverage(raw.edge_count(), 0);
    for (const auto& var : net.variables) {
      if (var.parents.size() > net.max_in_degree)
        throw InstanceError("dependency variable '" + var.name + "' exceeds in-degree bound");
      if (var.cpt.size() != (std::size_t{1} << var.parents.size()))
        throw InstanceError("dependency variable '" + var.name + "' has a CPT of the wrong size");
      for (const auto& row : var.cpt) {
        for (const auto& p : row)
          if (p.sign() < 0 || p > Rational(1)) throw InstanceError("dependency variable '" + var.name + "': probability out of range");
        if (row[0] + row[1] != Rational(1)) throw InstanceError("dependency variable '" + var.name + "': CPT row not normalized");
      }
      if (var.edge) {
        if (*var.edge >= raw.edge_count()) throw InstanceError("dependency variable '" + var.name + "' names an unknown edge");
        ++coverage[*var.edge];
      }
    }
    for (EdgeId e = 0; e < raw.edge_count(); ++e) {
      if (coverage[e] > 1) throw InstanceError("edge '" + raw.edge_spec(e).id + "' is driven by several dependency variables");
      if (raw.edge_spec(e).uncertain() && coverage[e] == 0)
        throw InstanceError("uncertain edge '" + raw.edge_spec(e).id + "' is not covered by the dependency network");
    }
  }

  for (const auto& [key, cost] : raw.sensing().entries) {
    if (key.first >= raw.vertex_count() || key.second >= raw.edge_count())
      throw InstanceError("sensing entry references an unknown vertex or edge");
  }
  if (raw.variant() != Variant::Sensing && !raw.sensing().entries.empty())
    throw InstanceError("sensing costs given for a non-sensing instance");

  if (!detail::reachable_when_open(raw)) throw InstanceError("target unreachable even when every edge is open");
  return raw;
}

/// Complete assignment to every edge; certain edges carry their forced status.
struct Weather {
  std::vector<EdgeStatus> status;
  Rational probability;
};

namespace detail {

inline std::vector<EdgeStatus> forced_statuses(const Instance& inst) {
  std::vector<EdgeStatus> s(inst.edge_count(), EdgeStatus::Unknown);
  for (EdgeId e = 0; e < inst.edge_count(); ++e)
    if (auto f = inst.edge_spec(e).forced_status()) s[e] = *f;
  return s;
}

inline void enumerate_net(const Instance& inst, const std::vector<std::size_t>& order, std::size_t depth,
                          std::vector<std::uint8_t>& values, const Rational& prob, std::size_t cap, std::size_t& leaves,
                          std::map<std::vector<EdgeStatus>, Rational>& out, const std::vector<EdgeStatus>& base) {
  const auto& net = inst.dependency();
  if (depth == order.size()) {
    if (++leaves > cap) throw CapExceeded("weather enumeration", CapExceeded::kUnbounded, cap);
    auto status = base;
    for (const auto& var : net.variables) {
      if (!var.edge) continue;
      auto idx = static_cast<std::size_t>(&var - net.variables.data());
      auto s = values[idx] ? EdgeStatus::Blocked : EdgeStatus::Traversable;
      if (base[*var.edge] != EdgeStatus::Unknown && base[*var.edge] != s)
        throw InstanceError("dependency network contradicts the known status of edge '" + inst.edge_spec(*var.edge).id + "'");
      status[*var.edge] = s;
    }
    out[status] += prob;
    return;
  }
  auto vi = order[depth];
  const auto& var = net.variables[vi];
  std::size_t row = 0;
  for (std::size_t k = 0; k < var.parents.size(); ++k)
    if (values[var.parents[k]]) row |= std::size_t{1} << k;
  for (std::uint8_t val = 0; val < 2; ++val) {
    const auto& p = var.cpt[row][val];
    if (p.is_zero()) continue;
    values[vi] = val;
    enumerate_net(inst, order, depth + 1, values, prob * p, cap, leaves, out, base);
  }
}

}  // namespace detail

/// Every positive-probability weather, probabilities summing to exactly 1.
inline std::vector<Weather> weather_support(const Instance& inst, std::size_t cap = kDefaultWeatherCap) {
  auto base = detail::forced_statuses(inst);
  std::vector<Weather> out;
  if (inst.variant() == Variant::Dependent) {
    auto order = inst.dependency().topological_order();
    std::vector<std::uint8_t> values(inst.dependency().variables.size(), 0);
    std::map<std::vector<EdgeStatus>, Rational> acc;
    std::size_t leaves = 0;
    detail::enumerate_net(inst, order, 0, values, Rational(1), cap, leaves, acc, base);
    for (auto& [status, p] : acc) out.push_back(Weather{status, p});
    return out;
  }
  auto unc = inst.uncertain_edges();
  if (unc.size() >= 63 || (std::size_t{1} << unc.size()) > cap)
    throw CapExceeded("weather enumeration", unc.size() >= 63 ? CapExceeded::kUnbounded : (std::size_t{1} << unc.size()), cap);
  std::size_t count = std::size_t{1} << unc.size();
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Weather w{base, Rational(1)};
    for (std::size_t i = 0; i < unc.size(); ++i) {
      const auto& spec = inst.edge_spec(unc[i]);
      bool blocked = (mask >> i) & 1U;
      w.status[unc[i]] = blocked ? EdgeStatus::Blocked : EdgeStatus::Traversable;
      w.probability *= blocked ? spec.block_p : Rational(1) - spec.block_p;
    }
    out.push_back(std::move(w));
  }
  return out;
}

/// Exact Bernoulli(p) draw at 2^-64 resolution.
template <class Rng>
bool bernoulli(Rng& rng, const Rational& p) {
  if (p.sign() <= 0) return false;
  if (p >= Rational(1)) return true;
  std::uint64_t r = rng();
  Rational::Integer lhs = Rational::Integer(r) * p.denominator();
  Rational::Integer rhs = p.numerator() << 64;
  return lhs < rhs;
}

template <class Rng>
Weather sample_weather(const Instance& inst, Rng& rng) {
  Weather w{detail::forced_statuses(inst), Rational(1)};
  if (inst.variant() == Variant::Dependent) {
    const auto& net = inst.dependency();
    std::vector<std::uint8_t> values(net.variables.size(), 0);
    for (auto vi : net.topological_order()) {
      const auto& var = net.variables[vi];
      std::size_t row = 0;
      for (std::size_t k = 0; k < var.parents.size(); ++k)
        if (values[var.parents[k]]) row |= std::size_t{1} << k;
      bool one = bernoulli(rng, var.cpt[row][1]);
      values[vi] = one ? 1 : 0;
      w.probability *= var.cpt[row][one ? 1 : 0];
      if (var.edge) w.status[*var.edge] = one ? EdgeStatus::Blocked : EdgeStatus::Traversable;
    }
    return w;
  }
  for (auto e : inst.uncertain_edges()) {
    bool blocked = bernoulli(rng, inst.edge_spec(e).block_p);
    w.status[e] = blocked ? EdgeStatus::Blocked : EdgeStatus::Traversable;
    w.probability *= blocked ? inst.edge_spec(e).block_p : Rational(1) - inst.edge_spec(e).block_p;
  }
  return w;
}

/// Deterministic in `seed`.
inline Weather sample_weather(const Instance& inst, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_weather(inst, rng);
}

/// Agent position plus every edge status it has learned.
struct Belief {
  VertexId position = 0;
  std::vector<EdgeStatus> known;

  friend bool operator==(const Belief&, const Belief&) = default;
};

struct BeliefHash {
  std::size_t operator()(const Belief& b) const noexcept {
    std::size_t h = std::hash<std::size_t>{}(b.position) * 0x9E3779B97F4A7C15ULL;
    for (auto s : b.known) h = (h ^ static_cast<std::size_t>(s)) * 0x100000001B3ULL;
    return h;
  }
};

/// Belief at the source before anything is observed; only a-priori known edges are set.
inline Belief prior_belief(const Instance& inst) { return Belief{inst.source(), detail::forced_statuses(inst)}; }

inline std::vector<EdgeId> unknown_incident(const Instance& inst, const Belief& b, VertexId v) {
  std::vector<EdgeId> out;
  for (auto e : inst.incident(v))
    if (b.known[e] == EdgeStatus::Unknown) out.push_back(e);
  return out;
}

/// Copies the weather's status of every edge incident on `vertex` into the belief.
inline Belief observe(const Instance& inst, const Belief& belief, const Weather& weather, VertexId vertex) {
  if (vertex != belief.position) throw InstanceError("observe: vertex differs from the belief position");
  Belief out = belief;
  for (auto e : inst.incident(vertex)) out.known[e] = weather.status[e];
  return out;
}

/// Human-readable belief key: position plus revealed statuses of uncertain edges.
inline std::string belief_key(const Instance& inst, const Belief& b) {
  std::string key = inst.vertex_name(b.position) + "|";
  bool first = true;
  for (EdgeId e = 0; e < b.known.size(); ++e) {
    if (!inst.edge_spec(e).uncertain() || b.known[e] == EdgeStatus::Unknown) continue;
    if (!first) key += ',';
    first = false;
    key += inst.edge_spec(e).id + "=" + status_char(b.known[e]);
  }
  return key;
}

/// Identifies b with a: b's edges are rehomed to a and b is removed. A zero-cost sure edge
/// joining them is dropped; any other edge joining them would become a self-loop.
inline Instance merge_vertices(const Instance& inst, VertexId a, VertexId b) {
  if (a == b) throw InstanceError("merge_vertices: identical vertices");
  if (a >= inst.vertex_count() || b >= inst.vertex_count()) throw InstanceError("merge_vertices: unknown vertex");
  std::pair<VertexId, VertexId> st = std::minmax(inst.source(), inst.target());
  if (std::pair<VertexId, VertexId>(std::minmax(a, b)) == st) throw InstanceError("merge_vertices: cannot merge source with target");

  std::vector<EdgeId> dropped;
  for (auto e : inst.incident(b)) {
    const auto& spec = inst.edge_spec(e);
    if (!spec.incident(a)) continue;
    bool layout_edge = spec.cost == Cost(0) && spec.block_p.is_zero();
    if (!layout_edge) throw InstanceError("merge_vertices: edge '" + spec.id + "' would become a self-loop");
    dropped.push_back(e);
  }

  auto remap_v = [&](VertexId v) { return v == b ? (a > b ? a - 1 : a) : (v > b ? v - 1 : v); };
  Instance out;
  for (VertexId v = 0; v < inst.vertex_count(); ++v)
    if (v != b) out.add_vertex(inst.vertex_name(v));
  std::vector<std::optional<EdgeId>> edge_map(inst.edge_count());
  for (EdgeId e = 0; e < inst.edge_count(); ++e) {
    if (std::find(dropped.begin(), dropped.end(), e) != dropped.end()) continue;
    auto spec = inst.edge_spec(e);
    spec.tail = remap_v(spec.tail);
    spec.head = remap_v(spec.head);
    edge_map[e] = out.add_edge(spec);
  }
  out.set_source(remap_v(inst.source()));
  out.set_target(remap_v(inst.target()));
  out.set_variant(inst.variant());

  auto net = inst.dependency();
  for (auto& var : net.variables) {
    if (!var.edge) continue;
    if (!edge_map[*var.edge]) throw InstanceError("merge_vertices: dropped edge is driven by the dependency network");
    var.edge = *edge_map[*var.edge];
  }
  out.dependency() = std::move(net);
  for (const auto& [key, cost] : inst.sensing().entries) {
    if (!edge_map[key.second]) continue;
    out.sensing().entries[{remap_v(key.first), *edge_map[key.second]}] = cost;
  }
  return out;
}

inline Instance merge_vertices(const Instance& inst, const std::string& a, const std::string& b) {
  return merge_vertices(inst, inst.vertex(a), inst.vertex(b));
}

}  // namespace ctplab
