#pragma once

#include "ctplab/model.hpp"
#include "ctplab/outcomes.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace ctplab {

/// A policy misbehaved at a reachable belief (illegal action, loop, unknown rule).
class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Action {
  enum class Kind { Move, Sense, GiveUpToDefault, Halt };
  Kind kind = Kind::Halt;
  EdgeId edge = 0;

  static Action move(EdgeId e) { return {Kind::Move, e}; }
  static Action sense(EdgeId e) { return {Kind::Sense, e}; }
  static Action give_up(EdgeId e) { return {Kind::GiveUpToDefault, e}; }
  static Action halt() { return {Kind::Halt, 0}; }

  friend bool operator==(const Action&, const Action&) = default;
};

/// "Move(s,t)" style rendering. Moves name the current position and the far endpoint.
inline std::string describe(const Instance& inst, const Action& a, VertexId position) {
  switch (a.kind) {
    case Action::Kind::Move: {
      const auto& e = inst.edge_spec(a.edge);
      return "Move(" + inst.vertex_name(position) + "," + inst.vertex_name(e.other(position)) + ")";
    }
    case Action::Kind::Sense: {
      const auto& e = inst.edge_spec(a.edge);
      return "Sense(" + inst.vertex_name(e.tail) + "," + inst.vertex_name(e.head) + ")";
    }
    case Action::Kind::GiveUpToDefault: return "GiveUpToDefault(" + inst.edge_spec(a.edge).id + ")";
    case Action::Kind::Halt: return "Halt";
  }
  return "?";
}

/// nullopt means the policy has no action: the traveler is stranded (infinite cost).
using Decision = std::optional<Action>;
using Decider = std::function<Decision(const Belief&)>;

struct TreePolicy {
  std::unordered_map<Belief, Decision, BeliefHash> table;
};

struct RulePolicy {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct Policy {
  std::variant<TreePolicy, RulePolicy> repr;
};

inline Decider tree_decider(TreePolicy tree) {
  auto t = std::make_shared<const TreePolicy>(std::move(tree));
  return [t](const Belief& b) -> Decision {
    auto it = t->table.find(b);
    if (it == t->table.end()) throw PolicyError("decision tree has no entry for the belief");
    return it->second;
  };
}

namespace detail {

/// Cheapest path over edges known traversable (or a-priori open) with finite cost.
inline std::optional<Rational> known_open_distance(const Instance& inst, const Belief& b, VertexId from, VertexId to) {
  using Item = std::pair<Rational, VertexId>;
  auto cmp = [](const Item& x, const Item& y) { return x.first > y.first; };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
  std::vector<std::optional<Rational>> dist(inst.vertex_count());
  dist[from] = Rational(0);
  pq.emplace(Rational(0), from);
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (*dist[v] < d) continue;
    if (v == to) return d;
    for (auto e : inst.incident(v)) {
      const auto& spec = inst.edge_spec(e);
      if (!spec.usable_from(v) || spec.cost.is_infinite() || b.known[e] != EdgeStatus::Traversable) continue;
      auto w = spec.other(v);
      Rational nd = d + spec.cost.value();
      if (!dist[w] || nd < *dist[w]) {
        dist[w] = nd;
        pq.emplace(nd, w);
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Cost charged by GiveUpToDefault(e): walk known-open edges to the usable endpoint of e, then take e to t.
inline Rational give_up_cost(const Instance& inst, const Belief& b, EdgeId e) {
  const auto& spec = inst.edge_spec(e);
  VertexId t = inst.target();
  if (!spec.incident(t) || spec.other(t) == t) throw PolicyError("default edge '" + spec.id + "' does not end at the target");
  VertexId from = spec.other(t);
  if (!spec.usable_from(from)) throw PolicyError("default edge '" + spec.id + "' cannot be traversed toward the target");
  if (b.known[e] != EdgeStatus::Traversable || spec.cost.is_infinite())
    throw PolicyError("default edge '" + spec.id + "' is not known open with finite cost");
  auto d = detail::known_open_distance(inst, b, b.position, from);
  if (!d) throw PolicyError("default edge '" + spec.id + "' is not reachable through known-open edges");
  return *d + spec.cost.value();
}

/// Throws PolicyError naming the belief when the action is illegal there.
inline void check_legal(const Instance& inst, const Belief& b, const Action& a) {
  auto fail = [&](const std::string& why) {
    throw PolicyError("illegal action " + (a.edge < inst.edge_count() || a.kind == Action::Kind::Halt ? describe(inst, a, b.position) : std::string("?")) +
                      " at belief " + belief_key(inst, b) + ": " + why);
  };
  if (a.kind != Action::Kind::Halt && a.edge >= inst.edge_count()) fail("unknown edge");
  switch (a.kind) {
    case Action::Kind::Move: {
      const auto& e = inst.edge_spec(a.edge);
      if (!e.usable_from(b.position)) fail("edge not usable from the current position");
      if (b.known[a.edge] != EdgeStatus::Traversable) fail("edge not known traversable");
      if (e.cost.is_infinite()) fail("edge has infinite cost");
      return;
    }
    case Action::Kind::Sense: {
      if (inst.variant() != Variant::Sensing) fail("sensing on a non-sensing instance");
      if (b.known[a.edge] != EdgeStatus::Unknown) fail("edge status already known");
      if (inst.sensing().lookup(b.position, a.edge).is_infinite()) fail("sensing unavailable here");
      return;
    }
    case Action::Kind::GiveUpToDefault: {
      try {
        give_up_cost(inst, b, a.edge);
      } catch (const PolicyError& err) {
        fail(err.what());
      }
      return;
    }
    case Action::Kind::Halt:
      if (b.position != inst.target()) fail("halt away from the target");
      return;
  }
}

struct OutcomeEntry {
  std::string label;
  Rational probability;
  Cost conditional_cost;
};

struct EvalResult {
  Cost expected_cost;
  std::vector<OutcomeEntry> breakdown;
  std::size_t beliefs_visited = 0;
};

enum class EvalMode { Auto, Tree, Weather };

struct EvalOptions {
  EvalMode mode = EvalMode::Auto;
  std::size_t cap = kDefaultWeatherCap;
};

inline constexpr const char* kStrandedLabel = "stranded";

namespace detail {

/// label -> (probability, probability-weighted cost)
using Breakdown = std::map<std::string, std::pair<Rational, Cost>>;

inline void accumulate(Breakdown& into, const Rational& p, const Breakdown& sub, const Rational& step) {
  for (const auto& [label, pc] : sub) {
    auto& slot = into[label];
    slot.first += p * pc.first;
    slot.second = slot.second + p * (pc.second + Cost(step * pc.first));
  }
}

inline EvalResult finish(const Breakdown& bd, std::size_t visited) {
  EvalResult r;
  r.expected_cost = Cost(0);
  r.beliefs_visited = visited;
  for (const auto& [label, pc] : bd) {
    if (pc.first.is_zero()) continue;
    Cost cond = pc.second.is_finite() ? Cost(pc.second.value() / pc.first) : Cost::infinite();
    r.breakdown.push_back({label, pc.first, cond});
    r.expected_cost = r.expected_cost + pc.second;
  }
  return r;
}

class TreeEvaluator {
 public:
  TreeEvaluator(const Instance& inst, const Decider& decide, std::size_t cap)
      : inst_(inst), decide_(decide), model_(inst, cap) {}

  Breakdown root() {
    Belief b = prior_belief(inst_);
    Breakdown out;
    if (b.position == inst_.target()) {
      out["at-target"] = {Rational(1), Cost(0)};
      return out;
    }
    for (const auto& o : model_.branch(b, unknown_incident(inst_, b, b.position)))
      accumulate(out, o.probability, eval(apply_outcome(b, o)), Rational(0));
    return out;
  }

  std::size_t visited() const { return memo_.size(); }

 private:
  const Breakdown& eval(const Belief& b) {
    if (auto it = memo_.find(b); it != memo_.end()) return it->second;
    if (!on_stack_.insert(b).second)
      throw PolicyError("policy revisits belief " + belief_key(inst_, b) + " without progress");
    Breakdown out;
    Decision act = decide_(b);
    if (!act) {
      out[kStrandedLabel] = {Rational(1), Cost::infinite()};
    } else {
      check_legal(inst_, b, *act);
      const auto& spec = inst_.edge_spec(act->edge);
      switch (act->kind) {
        case Action::Kind::Move: {
          VertexId next = spec.other(b.position);
          const Rational& c = spec.cost.value();
          if (next == inst_.target()) {
            out[spec.id] = {Rational(1), Cost(c)};
            break;
          }
          Belief moved = b;
          moved.position = next;
          for (const auto& o : model_.branch(moved, unknown_incident(inst_, moved, next)))
            accumulate(out, o.probability, eval(apply_outcome(moved, o)), c);
          break;
        }
        case Action::Kind::Sense: {
          Cost sc = inst_.sensing().lookup(b.position, act->edge);
          for (const auto& o : model_.branch(b, {act->edge}))
            accumulate(out, o.probability, eval(apply_outcome(b, o)), sc.value());
          break;
        }
        case Action::Kind::GiveUpToDefault:
          out[spec.id] = {Rational(1), Cost(give_up_cost(inst_, b, act->edge))};
          break;
        case Action::Kind::Halt:
          out["halt"] = {Rational(1), Cost(0)};
          break;
      }
    }
    on_stack_.erase(b);
    return memo_.emplace(b, std::move(out)).first->second;
  }

  const Instance& inst_;
  const Decider& decide_;
  OutcomeModel model_;
  std::unordered_map<Belief, Breakdown, BeliefHash> memo_;
  std::unordered_set<Belief, BeliefHash> on_stack_;
};

}  // namespace detail

/// Runs the policy on one fixed weather. Returns (label of the final event, realized cost).
inline std::pair<std::string, Cost> run_episode(const Instance& inst, const Decider& decide, const Weather& w) {
  Belief b = observe(inst, prior_belief(inst), w, inst.source());
  Rational cost(0);
  std::unordered_set<Belief, BeliefHash> seen;
  if (b.position == inst.target()) return {"at-target", Cost(0)};
  while (true) {
    if (!seen.insert(b).second) throw PolicyError("policy revisits belief " + belief_key(inst, b) + " without progress");
    Decision act = decide(b);
    if (!act) return {kStrandedLabel, Cost::infinite()};
    check_legal(inst, b, *act);
    const auto& spec = inst.edge_spec(act->edge);
    switch (act->kind) {
      case Action::Kind::Move: {
        cost += spec.cost.value();
        b.position = spec.other(b.position);
        if (b.position == inst.target()) return {spec.id, Cost(cost)};
        b = observe(inst, b, w, b.position);
        break;
      }
      case Action::Kind::Sense:
        cost += inst.sensing().lookup(b.position, act->edge).value();
        b.known[act->edge] = w.status[act->edge];
        break;
      case Action::Kind::GiveUpToDefault:
        return {spec.id, Cost(cost + give_up_cost(inst, b, act->edge))};
      case Action::Kind::Halt:
        return {"halt", Cost(cost)};
    }
  }
}

/// Exact expected cost. Tree mode recurses over revelation outcomes; weather mode runs the
/// policy on every enumerated weather. Auto picks tree mode.
inline EvalResult evaluate_exact(const Instance& inst, const Decider& decide, const EvalOptions& opts = {}) {
  if (opts.mode == EvalMode::Weather) {
    detail::Breakdown bd;
    auto weathers = weather_support(inst, opts.cap);
    for (const auto& w : weathers) {
      auto [label, c] = run_episode(inst, decide, w);
      auto& slot = bd[label];
      slot.first += w.probability;
      slot.second = slot.second + w.probability * c;
    }
    return detail::finish(bd, weathers.size());
  }
  detail::TreeEvaluator ev(inst, decide, opts.cap);
  auto bd = ev.root();
  return detail::finish(bd, ev.visited());
}

struct SimResult {
  double mean = 0;
  double stderr_ = 0;
  std::size_t trials = 0;
};

/// Per-trial generator seed derived from (seed, trial) so the result is schedule independent.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline SimResult simulate(const Instance& inst, const Decider& decide, std::size_t trials, std::uint64_t seed,
                          unsigned threads = 1) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  std::vector<double> costs(trials);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::mt19937_64 rng(trial_seed(seed, i));
      Weather w = sample_weather(inst, rng);
      auto c = run_episode(inst, decide, w).second;
      costs[i] = c.is_finite() ? c.value().to_double() : std::numeric_limits<double>::infinity();
    }
  };
  if (threads <= 1) {
    work(0, trials);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    std::size_t chunk = (trials + threads - 1) / threads;
    for (unsigned k = 0; k < threads; ++k) {
      std::size_t begin = std::min(trials, k * chunk), end = std::min(trials, begin + chunk);
      pool.emplace_back([&, k, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  // Sequential reduction keeps the result bit-identical for any thread count.
  double sum = 0;
  for (double c : costs) sum += c;
  SimResult r;
  r.trials = trials;
  r.mean = sum / static_cast<double>(trials);
  if (!std::isfinite(r.mean)) {
    r.stderr_ = std::numeric_limits<double>::infinity();
    return r;
  }
  double ss = 0;
  for (double c : costs) ss += (c - r.mean) * (c - r.mean);
  double var = trials > 1 ? ss / static_cast<double>(trials - 1) : 0.0;
  r.stderr_ = std::sqrt(var / static_cast<double>(trials));
  return r;
}

}  // namespace ctplab
