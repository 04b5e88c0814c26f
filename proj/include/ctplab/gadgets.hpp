#pragma once

#include "ctplab/model.hpp"

#include <string>
#include <vector>

namespace ctplab {

struct BaitingParams {
  Rational L;
  long long N = 0;

  /// N = 2^ceil(log2(4L)) - 1.
  static BaitingParams from(const Rational& L) {
    if (L <= Rational(1)) throw std::invalid_argument("baiting gadget needs L > 1");
    return {L, (1LL << ceil_log2(Rational(4) * L)) - 1};
  }
};

struct ObservationParams {
  Rational L;
  Rational L1;
  long long N = 0;
  long long N1 = 0;

  static ObservationParams from(const Rational& L) {
    if (L <= Rational(8)) throw std::invalid_argument("observation gadget needs L > 8");
    return {L, Rational(5) * L / Rational(8), BaitingParams::from(L).N, (1LL << ceil_log2(Rational(6) * L)) - 1};
  }
};

struct GadgetHandle {
  std::string entry;
  std::string exit;
  std::string shortcut_target;
  std::optional<std::string> observation;
  std::vector<std::string> added_vertices;
  std::vector<std::string> added_edges;
  /// Vertices of a full crossing that takes no shortcut, entry first.
  std::vector<std::string> route;
  /// Edges of that crossing, in order.
  std::vector<std::string> route_edges;
  std::vector<GadgetHandle> parts;
};

/// Path u, P.v1..P.vN, v of N+1 sure sections of cost L/(N+1); zero-cost shortcuts P.s_i
/// (v_i,t) blocked with probability 1/2; sure cost-L shortcuts P.su (u,t) and P.sv (v,t).
inline GadgetHandle build_baiting(Instance& inst, const Rational& L, const std::string& u, const std::string& v,
                                  const std::string& t, const std::string& prefix) {
  auto params = BaitingParams::from(L);
  if (u == v) throw InstanceError("baiting gadget entry equals exit");
  inst.ensure_vertex(u);
  inst.ensure_vertex(v);
  inst.ensure_vertex(t);
  GadgetHandle h{u, v, t, std::nullopt, {}, {}, {u}, {}, {}};
  for (long long i = 1; i <= params.N; ++i) {
    auto name = prefix + ".v" + std::to_string(i);
    inst.add_vertex(name);
    h.added_vertices.push_back(name);
    h.route.push_back(name);
  }
  h.route.push_back(v);
  Rational section = L / Rational(params.N + 1);
  for (long long i = 0; i <= params.N; ++i) {
    auto id = prefix + ".p" + std::to_string(i);
    inst.add_edge(id, h.route[static_cast<std::size_t>(i)], h.route[static_cast<std::size_t>(i + 1)], Cost(section));
    h.added_edges.push_back(id);
    h.route_edges.push_back(id);
  }
  for (long long i = 1; i <= params.N; ++i) {
    auto id = prefix + ".s" + std::to_string(i);
    inst.add_edge(id, prefix + ".v" + std::to_string(i), t, Cost(0), Rational(1, 2));
    h.added_edges.push_back(id);
  }
  inst.add_edge(prefix + ".su", u, t, Cost(L));
  inst.add_edge(prefix + ".sv", v, t, Cost(L));
  h.added_edges.push_back(prefix + ".su");
  h.added_edges.push_back(prefix + ".sv");
  return h;
}

/// Entry u, exit v, observation terminal o. BG1 = P.bg1 from u to P.v1 (parameter L), BG2 = P.bg2 from
/// P.v1 to P.v2 (parameter 3L/2, whose exit shortcut is the 3L/2 edge (v2,t)), P.v2v3 zero-cost
/// blocked 3/4, P.v3o and P.ov4 sure cost L1, P.v4v1 zero-cost blocked 3/4, P.v1v1p sure cost 1,
/// and the closing BG3 = P.bg3 from P.v1p to the exit v (parameter L).
inline GadgetHandle build_observation(Instance& inst, const Rational& L, const std::string& u, const std::string& v,
                                      const std::string& o, const std::string& t, const std::string& prefix) {
  auto params = ObservationParams::from(L);
  inst.ensure_vertex(u);
  inst.ensure_vertex(v);
  inst.ensure_vertex(o);
  inst.ensure_vertex(t);
  std::string v1 = prefix + ".v1", v2 = prefix + ".v2", v3 = prefix + ".v3", v4 = prefix + ".v4", v1p = prefix + ".v1p";
  GadgetHandle h{u, v, t, o, {}, {}, {}, {}, {}};
  for (const auto& name : {v1, v2, v3, v4, v1p}) {
    inst.add_vertex(name);
    h.added_vertices.push_back(name);
  }
  auto bg1 = build_baiting(inst, L, u, v1, t, prefix + ".bg1");
  auto bg2 = build_baiting(inst, Rational(3) * L / Rational(2), v1, v2, t, prefix + ".bg2");
  auto add = [&](const std::string& id, const std::string& a, const std::string& b, Cost c, Rational p) {
    inst.add_edge(id, a, b, std::move(c), std::move(p));
    h.added_edges.push_back(id);
  };
  add(prefix + ".v2v3", v2, v3, Cost(0), Rational(3, 4));
  add(prefix + ".v3o", v3, o, Cost(params.L1), Rational(0));
  add(prefix + ".ov4", o, v4, Cost(params.L1), Rational(0));
  add(prefix + ".v4v1", v4, v1, Cost(0), Rational(3, 4));
  add(prefix + ".v1v1p", v1, v1p, Cost(1), Rational(0));
  auto bg3 = build_baiting(inst, L, v1p, v, t, prefix + ".bg3");

  for (const auto* part : {&bg1, &bg2, &bg3}) {
    h.added_vertices.insert(h.added_vertices.end(), part->added_vertices.begin(), part->added_vertices.end());
    h.added_edges.insert(h.added_edges.end(), part->added_edges.begin(), part->added_edges.end());
  }
  h.route = bg1.route;
  h.route.insert(h.route.end(), bg2.route.begin() + 1, bg2.route.end());
  for (const auto& name : {v3, o, v4, v1}) h.route.push_back(name);
  h.route.insert(h.route.end(), bg3.route.begin(), bg3.route.end());
  h.route_edges = bg1.route_edges;
  h.route_edges.insert(h.route_edges.end(), bg2.route_edges.begin(), bg2.route_edges.end());
  for (const auto& id : {prefix + ".v2v3", prefix + ".v3o", prefix + ".ov4", prefix + ".v4v1", prefix + ".v1v1p"})
    h.route_edges.push_back(id);
  h.route_edges.insert(h.route_edges.end(), bg3.route_edges.begin(), bg3.route_edges.end());
  h.parts = {bg1, bg2, bg3};
  return h;
}

/// Isolated baiting gadget from s = u: prefix "bg", plus a cost-M sure "fallback" edge (u,t) standing in
/// for the ambient graph, and a cost-K "terminal" edge (v,t) when K differs from L.
inline Instance build_baiting_harness(const Rational& L, const Rational& K, std::optional<Rational> fallback = Rational(1)) {
  Instance inst;
  inst.add_vertex("u");
  inst.add_vertex("v");
  inst.add_vertex("t");
  build_baiting(inst, L, "u", "v", "t", "bg");
  if (fallback) inst.add_edge("fallback", "u", "t", Cost(*fallback));
  if (K != L) inst.add_edge("terminal", "v", "t", Cost(K));
  inst.set_terminals("u", "t");
  return validate_instance(inst);
}

/// Isolated observation gadget from s = u with prefix "og" and a bare observation terminal o.
inline Instance build_observation_harness(const Rational& L, std::optional<Rational> fallback = std::nullopt) {
  Instance inst;
  inst.add_vertex("u");
  inst.add_vertex("v");
  inst.add_vertex("o");
  inst.add_vertex("t");
  build_observation(inst, L, "u", "v", "o", "t", "og");
  if (fallback) inst.add_edge("fallback", "u", "t", Cost(*fallback));
  inst.set_terminals("u", "t");
  return validate_instance(inst);
}

/// Observation gadget started at o = r5 with both 3/4 edges open, plus the exam neighbourhood of o:
/// guards (r2,r3), (r1',r2') and observation edge (r4,r5) zero-cost blocked p1, sure cost-1 edges
/// (r3,r4) and (r5,r1'), and zero-cost sure edges r2_t, r2p_t standing in for the rest of the exam.
inline Instance build_exam_escape_harness(const Rational& L, const Rational& p1) {
  Instance inst;
  for (const auto& name : {"u", "v", "o", "t", "r1p", "r2p", "r2", "r3", "r4"}) inst.add_vertex(name);
  build_observation(inst, L, "u", "v", "o", "t", "og");
  inst.set_edge_block_p(inst.edge("og.v2v3"), Rational(0));
  inst.set_edge_block_p(inst.edge("og.v4v1"), Rational(0));
  inst.add_edge("or1p", "o", "r1p", Cost(1));
  inst.add_edge("r1pr2p", "r1p", "r2p", Cost(0), p1);
  inst.add_edge("r2p_t", "r2p", "t", Cost(0));
  inst.add_edge("r4o", "r4", "o", Cost(0), p1);
  inst.add_edge("r3r4", "r3", "r4", Cost(1));
  inst.add_edge("r2r3", "r2", "r3", Cost(0), p1);
  inst.add_edge("r2_t", "r2", "t", Cost(0));
  inst.set_terminals("o", "t");
  return validate_instance(inst);
}

// ---- closed forms -------------------------------------------------------------------------

inline Rational baiting_C_pi(const Rational& L, const Rational& K) {
  auto p = BaitingParams::from(L);
  if (K.sign() < 0 || K > L) throw std::invalid_argument("terminal charge K must satisfy 0 <= K <= L");
  Rational n1(p.N + 1);
  return Rational(2) * L / n1 * (Rational(1) - Rational::pow2(-(p.N + 1))) + Rational::pow2(-p.N) * K;
}

inline Rational baiting_C_pi_j(const Rational& L, long long j, const Rational& M_j) {
  auto p = BaitingParams::from(L);
  if (j <= 0 || j > p.N) throw std::invalid_argument("j must satisfy 0 < j <= N = " + std::to_string(p.N));
  if (M_j < Rational(1)) throw std::invalid_argument("fallback cost M_j must be at least 1");
  Rational n1(p.N + 1);
  Rational half_j = Rational::pow2(-j);
  return Rational(2) * L / n1 * (Rational(1) - half_j) + half_j * Rational(j) * L / n1 + half_j * M_j;
}

enum class GadgetKind { Baiting, Observation };

struct SeriesStats {
  Rational q;
  Rational w1;
};

inline SeriesStats series_stats(GadgetKind kind, const Rational& L, long long k) {
  if (k < 1) throw std::invalid_argument("series length k must be at least 1");
  if (kind == GadgetKind::Baiting) {
    auto p = BaitingParams::from(L);
    return {Rational::pow2(-k * p.N), Rational(k) * L};
  }
  auto p = ObservationParams::from(L);
  return {Rational::pow2(-k * (2 * p.N + p.N1 + 4)), Rational(k) * (Rational(19) * L + Rational(4)) / Rational(4)};
}

inline Rational w2_bg1(const Rational& L) {
  auto p = BaitingParams::from(L);
  return Rational(2) * L / Rational(p.N + 1) * (Rational(1) - Rational::pow2(-(p.N + 1))) - Rational::pow2(-p.N) * L;
}

/// The nested expression for one observation gadget, term by term as published.
inline Rational w2_og1(const Rational& L) {
  auto p = ObservationParams::from(L);
  Rational w2L = w2_bg1(L);
  Rational threeHalf = Rational(3) * L / Rational(2);
  Rational inner = w2_bg1(threeHalf) + Rational::pow2(-p.N - p.N1) * threeHalf +
                   Rational::pow2(-p.N - p.N1 - 4) * (Rational(2) * p.L1 + Rational(1) + w2L);
  return w2L + Rational::pow2(-p.N) * (L + Rational::pow2(-p.N) * inner);
}

/// w2(G(k)) = w2(G(1)) + q(G(1)) (w1(G(1)) + w2(G(k-1))).
inline Rational w2_series(GadgetKind kind, const Rational& L, long long k) {
  if (k < 1) throw std::invalid_argument("series length k must be at least 1");
  auto one = series_stats(kind, L, 1);
  Rational base = kind == GadgetKind::Baiting ? w2_bg1(L) : w2_og1(L);
  Rational acc = base;
  for (long long i = 2; i <= k; ++i) acc = base + one.q * (one.w1 + acc);
  return acc;
}

/// Exact partial expectation of the crossing policy's cost over the outcomes in which one
/// observation gadget is left through a shortcut (every outcome except reaching the exit).
inline Rational og_shortcut_mass(const Rational& L) {
  auto p = ObservationParams::from(L);
  Rational threeHalf = Rational(3) * L / Rational(2);
  Rational a = Rational::pow2(-p.N), b = Rational::pow2(-p.N1);
  Rational s3 = Rational(1) - a;                        // shortcut somewhere in BG3
  Rational s2 = Rational(1) - Rational(1, 16) * a;      // shortcut at v2 or later
  Rational s1 = Rational(1) - b * Rational(1, 16) * a;  // shortcut after reaching v1
  Rational w1 = w2_bg1(threeHalf) +
                b * (threeHalf * s2 + Rational(15, 16) * threeHalf +
                     Rational(1, 16) * ((Rational(2) * p.L1 + Rational(1)) * s3 + w2_bg1(L)));
  return w2_bg1(L) + a * (L * s1 + w1);
}

}  // namespace ctplab
