#pragma once

#include "ctplab/gadgets.hpp"
#include "ctplab/policy_core.hpp"
#include "ctplab/qbf.hpp"
#include "ctplab/reductions.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace ctplab {

/// Parameterized rule from the reference library; validated when bound to an instance.
inline Policy reference_policy(const std::string& name, nlohmann::json params = nlohmann::json::object());

namespace detail {

inline Rational param_rational(const nlohmann::json& p, const std::string& key) {
  const auto& v = p.at(key);
  if (v.is_number_integer()) return Rational(v.get<long long>());
  return Rational::parse(v.get<std::string>());
}

inline std::string param_string(const nlohmann::json& p, const std::string& key, const std::string& fallback) {
  return p.contains(key) ? p.at(key).get<std::string>() : fallback;
}

inline bool known_open(const Belief& b, EdgeId e) { return b.known[e] == EdgeStatus::Traversable; }

/// Index of the baiting gadget with the given prefix: path edges, shortcut coins, terminals.
struct BaitingIndex {
  std::vector<EdgeId> path;       // prefix.p0 .. prefix.pN
  std::vector<EdgeId> shortcut;   // index i -> prefix.s_i (index 0 unused)
  std::vector<VertexId> vertex;   // 0 = u, i = v_i, N+1 = v
  EdgeId exit_shortcut = 0;
  long long N = 0;

  static BaitingIndex of(const Instance& inst, const std::string& prefix) {
    BaitingIndex ix;
    auto p0 = inst.find_edge(prefix + ".p0");
    if (!p0) throw PolicyError("no baiting gadget with prefix '" + prefix + "'");
    VertexId at = inst.edge_spec(*p0).tail;
    ix.vertex.push_back(at);
    for (long long i = 0;; ++i) {
      auto e = inst.find_edge(prefix + ".p" + std::to_string(i));
      if (!e) break;
      ix.path.push_back(*e);
      at = inst.edge_spec(*e).other(at);
      ix.vertex.push_back(at);
    }
    ix.N = static_cast<long long>(ix.path.size()) - 1;
    ix.shortcut.push_back(0);
    for (long long i = 1; i <= ix.N; ++i) ix.shortcut.push_back(inst.edge(prefix + ".s" + std::to_string(i)));
    ix.exit_shortcut = inst.edge(prefix + ".sv");
    return ix;
  }

  VertexId entry() const { return vertex.front(); }
  VertexId exit() const { return vertex.back(); }

  /// Position index on the path, or -1.
  long long at(VertexId v) const {
    for (std::size_t i = 0; i < vertex.size(); ++i)
      if (vertex[i] == v) return static_cast<long long>(i);
    return -1;
  }

  /// Forward crossing: take an open coin shortcut, else continue. Not defined at the exit.
  Decision forward(const Belief& b, long long i) const {
    if (i >= 1 && i <= N && known_open(b, shortcut[static_cast<std::size_t>(i)])) return Action::move(shortcut[static_cast<std::size_t>(i)]);
    return Action::move(path[static_cast<std::size_t>(i)]);
  }
};

/// Cheapest known-open edge from v to t among the candidates.
inline Decision cheapest_to_target(const Instance& inst, const Belief& b, const std::vector<EdgeId>& candidates) {
  std::optional<EdgeId> best;
  for (auto e : candidates) {
    const auto& spec = inst.edge_spec(e);
    if (!known_open(b, e) || !spec.usable_from(b.position) || spec.other(b.position) != inst.target()) continue;
    if (!best || spec.cost < inst.edge_spec(*best).cost) best = e;
  }
  if (!best) return std::nullopt;
  return Action::move(*best);
}

using Binder = std::function<Decider(const Instance&, const nlohmann::json&)>;

inline Decider bind_direct(const Instance& inst, const nlohmann::json& p) {
  EdgeId e = inst.edge(p.at("edge").get<std::string>());
  return [&inst, e](const Belief& b) -> Decision {
    if (inst.edge_spec(e).usable_from(b.position)) return Action::move(e);
    return std::nullopt;
  };
}

inline Decider bind_baiting(const Instance& inst, const nlohmann::json& p, std::optional<long long> retreat_at) {
  auto prefix = param_string(p, "prefix", "bg");
  if (p.contains("L")) BaitingParams::from(param_rational(p, "L"));
  auto ix = BaitingIndex::of(inst, prefix);
  std::vector<EdgeId> exits{ix.exit_shortcut};
  if (auto term = inst.find_edge(param_string(p, "terminal", "terminal"))) exits.push_back(*term);
  std::optional<EdgeId> fallback;
  if (retreat_at) {
    if (*retreat_at <= 0 || *retreat_at > ix.N) throw PolicyError("j must satisfy 0 < j <= N = " + std::to_string(ix.N));
    Rational M = param_rational(p, "M_j");
    if (M < Rational(1)) throw PolicyError("fallback cost M_j must be at least 1");
    fallback = inst.edge(param_string(p, "fallback", "fallback"));
    const auto& fs = inst.edge_spec(*fallback);
    if (!fs.incident(ix.entry()) || fs.other(ix.entry()) != inst.target() || fs.cost != Cost(M))
      throw PolicyError("fallback edge must join the gadget entry to t with cost M_j");
  }
  return [&inst, ix, exits, fallback, retreat_at](const Belief& b) -> Decision {
    long long i = ix.at(b.position);
    if (i < 0) return std::nullopt;
    if (b.position == ix.exit()) return cheapest_to_target(inst, b, exits);
    if (retreat_at && i == *retreat_at && !known_open(b, ix.shortcut[static_cast<std::size_t>(i)]))
      return Action::give_up(*fallback);
    return ix.forward(b, i);
  };
}

/// Observation gadget with prefix P: rules for the crossing policy and the local alternatives
/// considered at the observation terminal.
struct ObservationIndex {
  BaitingIndex bg1, bg2, bg3;
  VertexId v1, v2, v3, v4, v1p, o;
  EdgeId v2v3, v3o, ov4, v4v1, v1v1p;

  static ObservationIndex of(const Instance& inst, const std::string& P) {
    ObservationIndex x;
    x.bg1 = BaitingIndex::of(inst, P + ".bg1");
    x.bg2 = BaitingIndex::of(inst, P + ".bg2");
    x.bg3 = BaitingIndex::of(inst, P + ".bg3");
    x.v1 = inst.vertex(P + ".v1");
    x.v2 = inst.vertex(P + ".v2");
    x.v3 = inst.vertex(P + ".v3");
    x.v4 = inst.vertex(P + ".v4");
    x.v1p = inst.vertex(P + ".v1p");
    x.v2v3 = inst.edge(P + ".v2v3");
    x.v3o = inst.edge(P + ".v3o");
    x.ov4 = inst.edge(P + ".ov4");
    x.v4v1 = inst.edge(P + ".v4v1");
    x.v1v1p = inst.edge(P + ".v1v1p");
    x.o = inst.edge_spec(x.v3o).other(x.v3);
    return x;
  }

  /// Return leg from o: (o, v4, v1, v1') then cross BG3 and leave by its exit shortcut.
  Decision return_leg(const Instance& inst, const Belief& b) const {
    VertexId p = b.position;
    if (p == o) return Action::move(ov4);
    if (p == v4) return known_open(b, v4v1) ? Decision(Action::move(v4v1)) : std::nullopt;
    if (p == v1) return Action::move(v1v1p);
    if (p == bg3.exit()) return cheapest_to_target(inst, b, {bg3.exit_shortcut});
    long long i = bg3.at(p);
    if (i >= 0) return bg3.forward(b, i);
    return std::nullopt;
  }
};

inline Decider bind_og_pi_g(const Instance& inst, const nlohmann::json& p) {
  auto x = ObservationIndex::of(inst, param_string(p, "prefix", "og"));
  return [&inst, x](const Belief& b) -> Decision {
    VertexId pos = b.position;
    bool both_open = known_open(b, x.v2v3) && known_open(b, x.v4v1);
    if (pos == x.v1) {
      if (both_open) return Action::move(x.v1v1p);
      return x.bg2.forward(b, 0);
    }
    if (pos == x.v2) return both_open ? Action::move(x.v2v3) : Action::move(x.bg2.exit_shortcut);
    if (pos == x.v3) return Action::move(x.v3o);
    if (pos == x.o || pos == x.v4 || pos == x.bg3.exit()) return x.return_leg(inst, b);
    for (const auto* bg : {&x.bg1, &x.bg2, &x.bg3}) {
      long long i = bg->at(pos);
      if (i >= 0 && pos != bg->exit()) return bg->forward(b, i);
    }
    return std::nullopt;
  };
}

/// At o: case "1a" returns through (o, v4, v1, v1') and BG3; case "2a" is taken at v2 and uses the 3L/2 shortcut.
inline Decider bind_og_pi_prime(const Instance& inst, const nlohmann::json& p) {
  auto x = ObservationIndex::of(inst, param_string(p, "prefix", "og"));
  auto which = param_string(p, "case", "1a");
  if (which != "1a" && which != "2a") throw PolicyError("og_pi_prime case must be '1a' or '2a'");
  return [&inst, x, which](const Belief& b) -> Decision {
    if (which == "2a") {
      if (b.position == x.v2) return Action::move(x.bg2.exit_shortcut);
      return std::nullopt;
    }
    return x.return_leg(inst, b);
  };
}

/// Exam neighbourhood of o used by the escape attempts: o = r5, guard (r1', r2'), observation edge
/// (r4, r5), guard (r2, r3), with the remainder of the exam path abstracted by sure edges to t.
struct ExamIndex {
  VertexId r2, r3, r4, r1p, r2p;
  EdgeId r2r3, r3r4, r4o, or1p, r1pr2p, r2t, r2pt;

  static ExamIndex of(const Instance& inst) {
    return {inst.vertex("r2"),      inst.vertex("r3"),     inst.vertex("r4"),      inst.vertex("r1p"),
            inst.vertex("r2p"),     inst.edge("r2r3"),     inst.edge("r3r4"),      inst.edge("r4o"),
            inst.edge("or1p"),      inst.edge("r1pr2p"),   inst.edge("r2_t"),      inst.edge("r2p_t")};
  }
};

/// pi_1: cross (r5, r1'); continue if (r1', r2') is open, otherwise come back and run pi'.
/// pi_2 additionally tries (r5, r4, r3) and the guard (r3, r2) before falling back to pi'.
inline Decider bind_og_escape(const Instance& inst, const nlohmann::json& p, bool second) {
  auto x = ObservationIndex::of(inst, param_string(p, "prefix", "og"));
  auto ex = ExamIndex::of(inst);
  return [&inst, x, ex, second](const Belief& b) -> Decision {
    VertexId pos = b.position;
    bool first_failed = b.known[ex.r1pr2p] == EdgeStatus::Blocked;
    bool second_failed = b.known[ex.r2r3] == EdgeStatus::Blocked;
    if (pos == ex.r2p) return Action::move(ex.r2pt);
    if (pos == ex.r2) return Action::move(ex.r2t);
    if (pos == ex.r1p) return known_open(b, ex.r1pr2p) ? Action::move(ex.r1pr2p) : Action::move(ex.or1p);
    if (pos == ex.r3) return known_open(b, ex.r2r3) ? Action::move(ex.r2r3) : Action::move(ex.r3r4);
    if (pos == ex.r4) return second_failed ? Action::move(ex.r4o) : Action::move(ex.r3r4);
    if (pos == x.o) {
      if (b.known[ex.r1pr2p] == EdgeStatus::Unknown) return Action::move(ex.or1p);
      if (second && first_failed && known_open(b, ex.r4o) && b.known[ex.r2r3] == EdgeStatus::Unknown) return Action::move(ex.r4o);
      return x.return_leg(inst, b);
    }
    return x.return_leg(inst, b);
  };
}

/// Exam section from r0: cross it when every exam edge is known open, otherwise take the L shortcut.
inline Decider bind_exam(const Instance& inst, const nlohmann::json&) {
  std::vector<EdgeId> path;
  std::vector<VertexId> verts;
  VertexId at = inst.vertex("r0");
  verts.push_back(at);
  EdgeId first = inst.edge("exam.enter");
  path.push_back(first);
  at = inst.edge_spec(first).other(at);
  verts.push_back(at);
  for (long long i = 1;; ++i) {
    auto k = std::to_string(i);
    if (!inst.find_edge("guard" + k + ".a")) break;
    for (const auto& id : {"guard" + k + ".a", "guard" + k + ".b", "exam" + k + ".link", "clause" + k}) {
      EdgeId e = inst.edge(id);
      path.push_back(e);
      at = inst.edge_spec(e).other(at);
      verts.push_back(at);
    }
    auto next = inst.find_edge("exam" + k + ".next");
    EdgeId e = next ? *next : inst.edge("exam.exit");
    path.push_back(e);
    at = inst.edge_spec(e).other(at);
    verts.push_back(at);
  }
  EdgeId shortcut = inst.edge("exam.shortcut");
  return [path, verts, shortcut](const Belief& b) -> Decision {
    for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
      if (verts[i] != b.position) continue;
      if (i == 0) {
        for (auto e : path)
          if (!known_open(b, e)) return Action::move(shortcut);
      }
      return Action::move(path[i]);
    }
    return std::nullopt;
  };
}

inline QbfFormula formula_param(const nlohmann::json& p) {
  if (p.contains("qdimacs")) return parse_qdimacs_string(p.at("qdimacs").get<std::string>());
  QbfFormula f;
  f.n = p.at("n").get<int>();
  f.clauses = p.at("clauses").get<std::vector<std::vector<int>>>();
  f.check();
  return f;
}

/// Follows winning existential choices on the dependent construction and reads the exam parity.
inline Decider bind_assignment(const Instance& inst, const nlohmann::json& p) {
  QbfFormula f = formula_param(p);
  int n = f.n, m = f.m();
  std::map<VertexId, Decision> fixed;
  fixed[inst.source()] = Action::move(inst.edge("s_v1"));
  for (int i = 1; i <= n; ++i)
    for (bool pos : {true, false})
      for (int l = 1; l <= m; ++l)
        fixed[inst.vertex("v" + std::to_string(i) + "." + lit_tag(pos) + std::to_string(l))] =
            Action::move(inst.edge("path" + std::to_string(i) + "." + lit_tag(pos) + std::to_string(l)));
  for (int i = 1; i < n; ++i) fixed[inst.vertex("vp" + std::to_string(i))] = Action::move(inst.edge("link" + std::to_string(i)));
  fixed[inst.vertex("vp" + std::to_string(n))] = Action::move(inst.edge("vpn_r0"));
  fixed[inst.vertex("r1p")] = Action::move(inst.edge("r1p_t"));
  fixed[inst.vertex("r2p")] = Action::move(inst.edge("r2p_t"));
  std::vector<std::vector<EdgeId>> clause_obs(static_cast<std::size_t>(m));
  for (const auto& e : inst.edges())
    if (e.id.rfind("obs", 0) == 0) {
      auto dot = e.id.find('.');
      int l = std::stoi(e.id.substr(dot + 2));
      if (f.contains(l - 1, (e.id[dot + 1] == 'T' ? 1 : -1) * std::stoi(e.id.substr(3, dot - 3))))
        clause_obs[static_cast<std::size_t>(l - 1)].push_back(inst.edge(e.id));
    }
  EdgeId odd = inst.edge("choice_odd"), even = inst.edge("choice_even");
  EdgeId r1t = inst.edge("r1_t"), r2t = inst.edge("r2_t");
  VertexId r0 = inst.vertex("r0"), r1 = inst.vertex("r1"), r2 = inst.vertex("r2");
  return [&inst, f, n, fixed, clause_obs, odd, even, r1t, r2t, r0, r1, r2](const Belief& b) -> Decision {
    if (auto it = fixed.find(b.position); it != fixed.end()) return it->second;
    for (int i = 1; i <= n; ++i) {
      if (b.position != inst.vertex("v" + std::to_string(i))) continue;
      EdgeId te = inst.edge("x" + std::to_string(i) + ".T"), fe = inst.edge("x" + std::to_string(i) + ".F");
      if (QbfFormula::is_universal(i)) return known_open(b, te) ? Action::move(te) : Action::move(fe);
      std::vector<bool> prefix;
      for (int j = 1; j < i; ++j) {
        if (QbfFormula::is_universal(j)) {
          prefix.push_back(known_open(b, inst.edge("x" + std::to_string(j) + ".T")));
        } else {
          auto c = qbf_winning_choice(f, prefix, j);
          prefix.push_back(c.value_or(true));
        }
      }
      auto c = qbf_winning_choice(f, prefix, i);
      return c.value_or(true) ? Action::move(te) : Action::move(fe);
    }
    if (b.position == r0) {
      int open_clauses = 0;
      bool determined = true;
      for (const auto& obs : clause_obs) {
        std::optional<bool> seen;
        for (auto e : obs)
          if (b.known[e] != EdgeStatus::Unknown) seen = b.known[e] == EdgeStatus::Traversable;
        if (!seen) determined = false;
        else if (*seen) ++open_clauses;
      }
      bool go_odd = determined ? open_clauses % 2 == 1 : true;
      return Action::move(inst.edge(go_odd ? "r0_r1" : "r0_r2"));
    }
    if (b.position == r1) return known_open(b, odd) ? Action::move(odd) : Action::move(r1t);
    if (b.position == r2) return known_open(b, even) ? Action::move(even) : Action::move(r2t);
    return std::nullopt;
  };
}

/// Visits f:{v} for each cover vertex, senses its coins for free, walks the sensing path when every
/// coin is known open, senses x_t at u, and returns to s to use (s,x,t) or the default edge.
inline Decider bind_vc_cover(const Instance& inst, const nlohmann::json& p) {
  auto cover = p.at("cover").get<std::vector<std::string>>();
  std::vector<VertexId> fv;
  for (const auto& v : cover) fv.push_back(inst.vertex("f:" + v));
  std::vector<EdgeId> coins;
  std::vector<VertexId> path{inst.vertex("s")};
  EdgeId lead = inst.edge("lead");
  path.push_back(inst.edge_spec(lead).other(path[0]));
  for (const auto& e : inst.edges())
    if (e.id.rfind("f:", 0) == 0) coins.push_back(inst.edge(e.id));
  std::vector<EdgeId> path_edges{lead};
  for (auto c : coins) {
    path_edges.push_back(c);
    path.push_back(inst.edge_spec(c).other(path.back()));
  }
  EdgeId xt = inst.edge("x_t"), sx = inst.edge("s_x"), def = inst.edge("default");
  VertexId s = inst.source(), x = inst.vertex("x");
  return [&inst, fv, coins, path, path_edges, xt, sx, def, s, x](const Belief& b) -> Decision {
    VertexId pos = b.position;
    for (auto f : fv) {
      if (pos != f) continue;
      for (auto e : coins)
        if (b.known[e] == EdgeStatus::Unknown && inst.sensing().lookup(f, e).is_finite()) return Action::sense(e);
      return Action::move(inst.edge("to:" + inst.vertex_name(f).substr(2)));
    }
    if (pos == x) return Action::move(xt);
    bool coins_open = true;
    for (auto e : coins) coins_open = coins_open && known_open(b, e);
    if (pos == s) {
      if (b.known[xt] == EdgeStatus::Traversable) return Action::move(sx);
      if (b.known[xt] == EdgeStatus::Blocked) return Action::move(def);
      for (auto f : fv) {
        bool pending = false;
        for (auto e : coins)
          if (b.known[e] == EdgeStatus::Unknown && inst.sensing().lookup(f, e).is_finite()) pending = true;
        if (pending) return Action::move(inst.edge("to:" + inst.vertex_name(f).substr(2)));
      }
      return coins_open ? Action::move(path_edges[0]) : Action::move(def);
    }
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (path[i] != pos) continue;
      if (b.known[xt] != EdgeStatus::Unknown) return Action::move(path_edges[i - 1]);
      if (i + 1 == path.size()) return inst.sensing().lookup(pos, xt).is_finite() ? Decision(Action::sense(xt)) : std::nullopt;
      return known_open(b, path_edges[i]) ? Action::move(path_edges[i]) : Action::move(path_edges[i - 1]);
    }
    return std::nullopt;
  };
}

inline const std::map<std::string, Binder>& binders() {
  static const std::map<std::string, Binder> table = {
      {"direct", bind_direct},
      {"baiting_pi", [](const Instance& i, const nlohmann::json& p) { return bind_baiting(i, p, std::nullopt); }},
      {"baiting_pi_j",
       [](const Instance& i, const nlohmann::json& p) { return bind_baiting(i, p, p.at("j").get<long long>()); }},
      {"og_pi_g", bind_og_pi_g},
      {"og_pi_prime", bind_og_pi_prime},
      {"og_pi_1", [](const Instance& i, const nlohmann::json& p) { return bind_og_escape(i, p, false); }},
      {"og_pi_2", [](const Instance& i, const nlohmann::json& p) { return bind_og_escape(i, p, true); }},
      {"exam", bind_exam},
      {"assignment", bind_assignment},
      {"vc_cover", bind_vc_cover},
  };
  return table;
}

}  // namespace detail

inline std::vector<std::string> reference_policy_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : detail::binders()) out.push_back(name);
  return out;
}

inline Policy reference_policy(const std::string& name, nlohmann::json params) {
  if (!detail::binders().count(name)) throw PolicyError("unknown reference policy '" + name + "'");
  if (name == "baiting_pi_j") {
    if (!params.contains("j") || !params.contains("M_j")) throw PolicyError("baiting_pi_j needs j and M_j");
    long long j = params.at("j").get<long long>();
    if (params.contains("L")) {
      auto bp = BaitingParams::from(detail::param_rational(params, "L"));
      if (j <= 0 || j > bp.N) throw PolicyError("j must satisfy 0 < j <= N = " + std::to_string(bp.N));
    } else if (j <= 0) {
      throw PolicyError("j must be positive");
    }
    if (detail::param_rational(params, "M_j") < Rational(1)) throw PolicyError("fallback cost M_j must be at least 1");
  }
  if (name == "baiting_pi" && params.contains("L")) BaitingParams::from(detail::param_rational(params, "L"));
  return Policy{RulePolicy{name, std::move(params)}};
}

/// Resolves names against the instance once; the instance must outlive the decider.
inline Decider bind(const Policy& policy, const Instance& inst) {
  if (const auto* tree = std::get_if<TreePolicy>(&policy.repr)) return tree_decider(*tree);
  const auto& rule = std::get<RulePolicy>(policy.repr);
  auto it = detail::binders().find(rule.name);
  if (it == detail::binders().end()) throw PolicyError("unknown reference policy '" + rule.name + "'");
  try {
    return it->second(inst, rule.params);
  } catch (const nlohmann::json::exception& e) {
    throw PolicyError("bad parameters for '" + rule.name + "': " + e.what());
  } catch (const InstanceError& e) {
    throw PolicyError("policy '" + rule.name + "' does not fit this instance: " + e.what());
  }
}

inline EvalResult evaluate_exact(const Instance& inst, const Policy& policy, const EvalOptions& opts = {}) {
  auto d = bind(policy, inst);
  return evaluate_exact(inst, d, opts);
}

inline SimResult simulate(const Instance& inst, const Policy& policy, std::size_t trials, std::uint64_t seed, unsigned threads = 1) {
  auto d = bind(policy, inst);
  return simulate(inst, d, trials, seed, threads);
}

}  // namespace ctplab
