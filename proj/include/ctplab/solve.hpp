#pragma once

#include "ctplab/model.hpp"
#include "ctplab/outcomes.hpp"
#include "ctplab/policy_core.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace ctplab {

struct SolveStats {
  std::size_t beliefs_expanded = 0;
  std::size_t layers_solved = 0;
};

struct OptResult {
  Cost optimal_cost;
  /// Action at the belief reached after observing at s (first observation outcome when several exist).
  Decision optimal_first_action;
  Belief first_belief;
  TreePolicy policy;
  SolveStats stats;
};

struct SolveOptions {
  std::size_t cap = kDefaultWeatherCap;
};

namespace detail {

/// Expectimin over beliefs. For a fixed known-set every vertex whose incident edges are all known
/// is a decision vertex; moving between decision vertices keeps the known-set, so each known-set
/// layer is solved as a shortest-path problem whose exits (entering a vertex with unknown incident
/// edges, or sensing) lead to strictly larger known-sets.
class BeliefSolver {
 public:
  BeliefSolver(const Instance& inst, const SolveOptions& opts) : inst_(inst), model_(inst, opts.cap), cap_(opts.cap) {}

  OptResult run() {
    OptResult r;
    Belief b0 = prior_belief(inst_);
    r.optimal_cost = Cost(0);
    bool first = true;
    if (b0.position == inst_.target()) {
      r.first_belief = b0;
      return finish(std::move(r));
    }
    for (const auto& o : model_.branch(b0, unknown_incident(inst_, b0, b0.position))) {
      Belief b = apply_outcome(b0, o);
      Cost v = value(b);
      r.optimal_cost = r.optimal_cost + o.probability * v;
      if (first) {
        r.first_belief = b;
        r.optimal_first_action = memo_.at(b).action;
        first = false;
      }
    }
    return finish(std::move(r));
  }

 private:
  struct Entry {
    Cost value;
    Decision action;
  };

  OptResult finish(OptResult r) {
    for (auto& [b, e] : memo_) r.policy.table.emplace(b, e.action);
    r.stats.beliefs_expanded = memo_.size();
    r.stats.layers_solved = layers_;
    return r;
  }

  bool decision_vertex(const Belief& b, VertexId v) const {
    for (auto e : inst_.incident(v))
      if (b.known[e] == EdgeStatus::Unknown) return false;
    return true;
  }

  bool open_move(const Belief& b, VertexId from, EdgeId e) const {
    const auto& spec = inst_.edge_spec(e);
    return spec.usable_from(from) && b.known[e] == EdgeStatus::Traversable && spec.cost.is_finite();
  }

  /// Value of a decision belief.
  Cost value(const Belief& b) {
    if (auto it = memo_.find(b); it != memo_.end()) return it->second.value;
    solve_layer(b);
    return memo_.at(b).value;
  }

  /// Expected value of entering frontier vertex z with known-set of `b`.
  Cost enter(const Belief& b, VertexId z) {
    Belief moved = b;
    moved.position = z;
    Cost total(0);
    for (const auto& o : model_.branch(moved, unknown_incident(inst_, moved, z))) {
      Cost v = value(apply_outcome(moved, o));
      if (v.is_infinite()) return Cost::infinite();
      total = total + o.probability * v;
    }
    return total;
  }

  Cost sense(const Belief& b, EdgeId e, const Cost& sc) {
    Cost total(0);
    for (const auto& o : model_.branch(b, {e})) {
      Cost v = value(apply_outcome(b, o));
      if (v.is_infinite()) return Cost::infinite();
      total = total + o.probability * v;
    }
    return sc + total;
  }

  struct Option {
    Cost value;
    EdgeId edge;
    int kind;  // 0 move, 1 sense
    friend bool operator<(const Option& x, const Option& y) {
      return std::tie(x.value, x.edge, x.kind) < std::tie(y.value, y.edge, y.kind);
    }
  };

  void solve_layer(const Belief& start) {
    ++layers_;
    // Decision vertices reachable from the start through known-open edges.
    std::vector<VertexId> members;
    std::unordered_map<VertexId, std::size_t> index;
    std::deque<VertexId> todo{start.position};
    index[start.position] = 0;
    members.push_back(start.position);
    while (!todo.empty()) {
      VertexId y = todo.front();
      todo.pop_front();
      for (auto e : inst_.incident(y)) {
        if (!open_move(start, y, e)) continue;
        VertexId z = inst_.edge_spec(e).other(y);
        if (z == inst_.target() || index.count(z) || !decision_vertex(start, z)) continue;
        index[z] = members.size();
        members.push_back(z);
        todo.push_back(z);
      }
    }
    if (memo_.size() + members.size() > cap_) throw CapExceeded("belief space", memo_.size() + members.size(), cap_);

    // Exit options: reach t, enter a frontier vertex, or sense.
    std::vector<std::optional<Option>> exit_opt(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      VertexId y = members[i];
      Belief at = start;
      at.position = y;
      auto consider = [&](Option o) {
        if (!exit_opt[i] || o < *exit_opt[i]) exit_opt[i] = o;
      };
      for (auto e : inst_.incident(y)) {
        if (!open_move(start, y, e)) continue;
        const auto& spec = inst_.edge_spec(e);
        VertexId z = spec.other(y);
        if (z == inst_.target()) {
          consider({spec.cost, e, 0});
        } else if (!decision_vertex(start, z)) {
          consider({spec.cost + enter(at, z), e, 0});
        }
      }
      if (inst_.variant() == Variant::Sensing) {
        for (EdgeId e = 0; e < inst_.edge_count(); ++e) {
          if (start.known[e] != EdgeStatus::Unknown) continue;
          Cost sc = inst_.sensing().lookup(y, e);
          if (sc.is_infinite()) continue;
          consider({sense(at, e, sc), e, 1});
        }
      }
    }

    // Reverse Dijkstra from the exits over moves between decision vertices.
    std::vector<Cost> dist(members.size(), Cost::infinite());
    std::vector<std::size_t> settle_rank(members.size(), std::numeric_limits<std::size_t>::max());
    using Item = std::pair<Cost, std::size_t>;
    auto cmp = [](const Item& x, const Item& y) { return x > y; };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
    for (std::size_t i = 0; i < members.size(); ++i)
      if (exit_opt[i] && exit_opt[i]->value.is_finite()) {
        dist[i] = exit_opt[i]->value;
        pq.emplace(dist[i], i);
      }
    std::size_t rank = 0;
    while (!pq.empty()) {
      auto [d, i] = pq.top();
      pq.pop();
      if (settle_rank[i] != std::numeric_limits<std::size_t>::max() || d != dist[i]) continue;
      settle_rank[i] = rank++;
      VertexId z = members[i];
      // predecessors y with a usable open edge y -> z
      for (auto e : inst_.incident(z)) {
        const auto& spec = inst_.edge_spec(e);
        VertexId y = spec.other(z);
        auto it = index.find(y);
        if (it == index.end() || !open_move(start, y, e)) continue;
        std::size_t j = it->second;
        if (settle_rank[j] != std::numeric_limits<std::size_t>::max()) continue;
        Cost nd = spec.cost + d;
        if (nd < dist[j]) {
          dist[j] = nd;
          pq.emplace(nd, j);
        }
      }
    }

    // Final actions: exits or moves to decision vertices settled earlier, lowest edge id on ties.
    for (std::size_t i = 0; i < members.size(); ++i) {
      VertexId y = members[i];
      Belief at = start;
      at.position = y;
      Entry entry{dist[i], std::nullopt};
      if (dist[i].is_finite()) {
        std::optional<Option> best;
        if (exit_opt[i] && exit_opt[i]->value == dist[i]) best = exit_opt[i];
        for (auto e : inst_.incident(y)) {
          if (!open_move(start, y, e)) continue;
          const auto& spec = inst_.edge_spec(e);
          auto it = index.find(spec.other(y));
          if (it == index.end() || settle_rank[it->second] >= settle_rank[i]) continue;
          Option o{spec.cost + dist[it->second], e, 0};
          if (o.value == dist[i] && (!best || o < *best)) best = o;
        }
        entry.action = best->kind == 0 ? Action::move(best->edge) : Action::sense(best->edge);
      }
      memo_[at] = std::move(entry);
    }
  }

  const Instance& inst_;
  OutcomeModel model_;
  std::size_t cap_;
  std::size_t layers_ = 0;
  std::unordered_map<Belief, Entry, BeliefHash> memo_;
};

}  // namespace detail

inline OptResult solve_exact(const Instance& inst, const SolveOptions& opts = {}) {
  return detail::BeliefSolver(inst, opts).run();
}

inline OptResult solve_independent(const Instance& inst, const SolveOptions& opts = {}) {
  if (inst.variant() != Variant::Independent) throw InstanceError("solve_independent needs an independent instance");
  return solve_exact(inst, opts);
}

inline OptResult solve_dependent(const Instance& inst, const SolveOptions& opts = {}) {
  if (inst.variant() != Variant::Dependent) throw InstanceError("solve_dependent needs a dependent instance");
  return solve_exact(inst, opts);
}

inline OptResult solve_sensing(const Instance& inst, const SolveOptions& opts = {}) {
  if (inst.variant() != Variant::Sensing) throw InstanceError("solve_sensing needs a sensing instance");
  return solve_exact(inst, opts);
}

/// Collects the decisions of `decide` at every belief it reaches.
inline TreePolicy materialize(const Instance& inst, const Decider& decide, std::size_t cap = kDefaultWeatherCap) {
  TreePolicy tree;
  OutcomeModel model(inst, cap);
  std::vector<Belief> stack;
  Belief b0 = prior_belief(inst);
  if (b0.position == inst.target()) return tree;
  for (const auto& o : model.branch(b0, unknown_incident(inst, b0, b0.position))) stack.push_back(apply_outcome(b0, o));
  while (!stack.empty()) {
    Belief b = std::move(stack.back());
    stack.pop_back();
    if (tree.table.count(b)) continue;
    if (tree.table.size() >= cap) throw CapExceeded("policy materialization", CapExceeded::kUnbounded, cap);
    Decision act = decide(b);
    tree.table.emplace(b, act);
    if (!act) continue;
    check_legal(inst, b, *act);
    const auto& spec = inst.edge_spec(act->edge);
    if (act->kind == Action::Kind::Move) {
      Belief moved = b;
      moved.position = spec.other(b.position);
      if (moved.position == inst.target()) continue;
      for (const auto& o : model.branch(moved, unknown_incident(inst, moved, moved.position)))
        stack.push_back(apply_outcome(moved, o));
    } else if (act->kind == Action::Kind::Sense) {
      for (const auto& o : model.branch(b, {act->edge})) stack.push_back(apply_outcome(b, o));
    }
  }
  return tree;
}

/// Edge-disjoint s-t paths of an instance, each as its edge sequence from s.
inline std::vector<std::vector<EdgeId>> disjoint_paths(const Instance& inst) {
  VertexId s = inst.source(), t = inst.target();
  for (const auto& e : inst.edges())
    if (e.directed) throw InstanceError("disjoint-path brute force needs undirected edges");
  for (VertexId v = 0; v < inst.vertex_count(); ++v)
    if (v != s && v != t && inst.degree(v) != 2)
      throw InstanceError("vertex '" + inst.vertex_name(v) + "' breaks the disjoint-path topology");
  std::vector<std::vector<EdgeId>> paths;
  std::vector<char> used(inst.edge_count(), 0);
  for (auto e0 : inst.incident(s)) {
    if (used[e0]) continue;
    std::vector<EdgeId> path{e0};
    used[e0] = 1;
    VertexId at = inst.edge_spec(e0).other(s);
    if (at == s) throw InstanceError("disjoint-path brute force: path returns to s");
    while (at != t) {
      if (at == s) throw InstanceError("disjoint-path brute force: path returns to s");
      EdgeId next = inst.edge_count();
      for (auto e : inst.incident(at))
        if (!used[e]) next = e;
      if (next == inst.edge_count()) throw InstanceError("disjoint-path brute force: dead end");
      used[next] = 1;
      path.push_back(next);
      at = inst.edge_spec(next).other(at);
    }
    paths.push_back(std::move(path));
  }
  for (EdgeId e = 0; e < inst.edge_count(); ++e)
    if (!used[e]) throw InstanceError("edge '" + inst.edge_spec(e).id + "' is not on an s-t path");
  return paths;
}

namespace detail {

/// Expected cost of trying paths in `order` given which first edges are open; nullopt if some
/// positive-probability weather exhausts every path.
inline Cost committing_cost(const Instance& inst, const std::vector<std::vector<EdgeId>>& paths,
                            const std::vector<std::size_t>& order, const std::vector<char>& first_open) {
  Cost total(0);
  Rational reach(1);  // probability every earlier attempt failed
  for (auto i : order) {
    if (!first_open[i]) continue;
    const auto& path = paths[i];
    Rational prefix = inst.edge_spec(path[0]).cost.value();
    Rational alive(1);
    Rational fail_cost(0);
    for (std::size_t k = 1; k < path.size(); ++k) {
      const auto& spec = inst.edge_spec(path[k]);
      fail_cost += alive * spec.block_p * Rational(2) * prefix;
      alive *= Rational(1) - spec.block_p;
      prefix += spec.cost.value();
    }
    total = total + reach * Cost(alive * prefix + fail_cost);
    reach *= Rational(1) - alive;
    if (reach.is_zero()) return total;
  }
  return reach.is_zero() ? total : Cost::infinite();
}

}  // namespace detail

/// Best committing policy: for each outcome of the first edges at s, the cheapest path order.
inline OptResult solve_disjoint_bruteforce(const Instance& inst) {
  if (inst.variant() != Variant::Independent) throw InstanceError("disjoint-path brute force needs an independent instance");
  for (const auto& e : inst.edges())
    if (e.cost.is_infinite()) throw InstanceError("disjoint-path brute force needs finite costs");
  auto paths = disjoint_paths(inst);
  std::size_t P = paths.size();
  if (P > 8) throw CapExceeded("path orderings", CapExceeded::kUnbounded, 8);

  OutcomeModel model(inst);
  Belief b0 = prior_belief(inst);
  std::vector<EdgeId> firsts;
  for (const auto& p : paths) firsts.push_back(p[0]);

  std::map<std::vector<EdgeStatus>, std::vector<std::size_t>> chosen;
  OptResult r;
  r.optimal_cost = Cost(0);
  for (const auto& o : model.branch(b0, unknown_incident(inst, b0, b0.position))) {
    Belief b = apply_outcome(b0, o);
    std::vector<char> open(P);
    std::vector<EdgeStatus> key;
    for (std::size_t i = 0; i < P; ++i) {
      open[i] = b.known[firsts[i]] == EdgeStatus::Traversable;
      key.push_back(b.known[firsts[i]]);
    }
    std::vector<std::size_t> order(P);
    std::iota(order.begin(), order.end(), 0);
    std::optional<Cost> best;
    std::vector<std::size_t> best_order;
    do {
      Cost c = detail::committing_cost(inst, paths, order, open);
      if (!best || c < *best) {
        best = c;
        best_order = order;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    chosen[key] = best_order;
    r.optimal_cost = r.optimal_cost + o.probability * *best;
  }

  // Position on path i at index k means the traveler stands after path[i][0..k-1].
  std::vector<std::pair<std::size_t, std::size_t>> where(inst.vertex_count(), {P, 0});
  for (std::size_t i = 0; i < P; ++i) {
    VertexId at = inst.source();
    for (std::size_t k = 0; k + 1 < paths[i].size(); ++k) {
      at = inst.edge_spec(paths[i][k]).other(at);
      where[at] = {i, k + 1};
    }
  }
  Decider decide = [&inst, paths, firsts, chosen, where](const Belief& b) -> Decision {
    std::vector<EdgeStatus> key;
    for (auto e : firsts) key.push_back(b.known[e]);
    if (b.position == inst.source()) {
      for (auto i : chosen.at(key)) {
        bool dead = false;
        for (auto e : paths[i])
          if (b.known[e] == EdgeStatus::Blocked) dead = true;
        if (!dead) return Action::move(paths[i][0]);
      }
      return std::nullopt;
    }
    auto [i, k] = where[b.position];
    bool dead = false;
    for (auto e : paths[i])
      if (b.known[e] == EdgeStatus::Blocked) dead = true;
    if (!dead) return Action::move(paths[i][k]);
    return Action::move(paths[i][k - 1]);
  };
  r.policy = materialize(inst, decide);
  auto outcomes = model.branch(b0, unknown_incident(inst, b0, b0.position));
  r.first_belief = apply_outcome(b0, outcomes.front());
  r.optimal_first_action = decide(r.first_belief);
  r.stats.beliefs_expanded = r.policy.table.size();
  return r;
}

}  // namespace ctplab
