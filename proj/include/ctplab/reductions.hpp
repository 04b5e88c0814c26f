#pragma once

#include "ctplab/gadgets.hpp"
#include "ctplab/model.hpp"
#include "ctplab/qbf.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ctplab {

inline std::string lit_tag(bool positive) { return positive ? "T" : "F"; }

// ---- QBF -> dependent CTP -------------------------------------------------------------------

struct CtpDepReduction {
  Instance instance;
  Rational h;
};

struct CtpDepOptions {
  std::optional<Rational> h;
  /// Also build observation edges that are in no clause (independent coins nobody can exploit).
  bool include_idle_observation_edges = false;
};

/// True iff 0 < h < 2^(-n/2-1), decided without irrational arithmetic: h^2 < 2^(-n-2).
inline bool ctpdep_h_in_regime(const Rational& h, int n) {
  return h.sign() > 0 && h * h < Rational::pow2(-n - 2);
}

inline Rational ctpdep_default_h(int n) { return Rational::pow2(-((n + 1) / 2) - 2); }

/// Directed instance. Vertices s, t, v{i}, v{i}.T{l} / v{i}.F{l}, vp{i}, o{i}.T{l} / o{i}.F{l}, r0, r1, r1p,
/// r2, r2p. The universal pair x{i}.T / x{i}.F is driven by coin u{i}; every observation edge in
/// clause l copies coin c{l}; parity chain p{l} feeds choice_odd / choice_even.
inline CtpDepReduction qbf_to_ctpdep(const QbfFormula& f, const CtpDepOptions& opts = {}) {
  f.check();
  Rational h = opts.h ? *opts.h : ctpdep_default_h(f.n);
  if (!ctpdep_h_in_regime(h, f.n)) throw std::invalid_argument("h must satisfy 0 < h < 2^(-n/2-1)");
  int n = f.n, m = f.m();
  Instance inst;
  inst.set_variant(Variant::Dependent);
  inst.add_vertex("s");
  inst.add_vertex("t");
  for (int i = 1; i <= n; ++i) {
    inst.add_vertex("v" + std::to_string(i));
    for (bool pos : {true, false})
      for (int l = 1; l <= m; ++l) inst.add_vertex("v" + std::to_string(i) + "." + lit_tag(pos) + std::to_string(l));
    inst.add_vertex("vp" + std::to_string(i));
  }
  for (const auto& name : {"r0", "r1", "r1p", "r2", "r2p"}) inst.add_vertex(name);

  auto directed = [&](const std::string& id, const std::string& a, const std::string& b, Cost c, Rational p = Rational(0)) {
    return inst.add_edge(id, a, b, std::move(c), std::move(p), true);
  };
  directed("default", "s", "t", Cost(h));
  directed("s_v1", "s", "v1", Cost(0));
  auto& net = inst.dependency();
  net.max_in_degree = 2;
  for (int i = 1; i <= n; ++i) {
    std::string vi = "v" + std::to_string(i), vp = "vp" + std::to_string(i);
    bool universal = QbfFormula::is_universal(i);
    std::optional<std::size_t> coin;
    if (universal) coin = net.add({"u" + std::to_string(i), std::nullopt, {}, coin_cpt(Rational(1, 2))});
    for (bool pos : {true, false}) {
      std::string tag = lit_tag(pos);
      std::string first = m > 0 ? vi + "." + tag + "1" : vp;
      auto e = directed("x" + std::to_string(i) + "." + tag, vi, first, Cost(0), universal ? Rational(1, 2) : Rational(0));
      if (universal) net.add({"x" + std::to_string(i) + "." + tag, e, {*coin}, copy_cpt(!pos)});
      for (int l = 1; l <= m; ++l) {
        std::string here = vi + "." + tag + std::to_string(l);
        std::string next = l < m ? vi + "." + tag + std::to_string(l + 1) : vp;
        directed("path" + std::to_string(i) + "." + tag + std::to_string(l), here, next, Cost(0));
      }
    }
    if (i < n) directed("link" + std::to_string(i), vp, "v" + std::to_string(i + 1), Cost(0));
  }
  directed("vpn_r0", "vp" + std::to_string(n), "r0", Cost(0));

  std::vector<std::size_t> clause_coin;
  for (int l = 1; l <= m; ++l) clause_coin.push_back(net.add({"c" + std::to_string(l), std::nullopt, {}, coin_cpt(Rational(1, 2))}));
  for (int i = 1; i <= n; ++i)
    for (bool pos : {true, false})
      for (int l = 1; l <= m; ++l) {
        bool in_clause = f.contains(l - 1, pos ? i : -i);
        if (!in_clause && !opts.include_idle_observation_edges) continue;
        std::string tag = lit_tag(pos) + std::to_string(l);
        std::string o = "o" + std::to_string(i) + "." + tag;
        inst.add_vertex(o);
        auto e = directed("obs" + std::to_string(i) + "." + tag, o, "v" + std::to_string(i) + "." + tag, Cost(0), Rational(1, 2));
        if (in_clause)
          net.add({"obs" + std::to_string(i) + "." + tag, e, {clause_coin[static_cast<std::size_t>(l - 1)]}, copy_cpt(false)});
        else
          net.add({"obs" + std::to_string(i) + "." + tag, e, {}, coin_cpt(Rational(1, 2))});
      }

  directed("r0_r1", "r0", "r1", Cost(0));
  directed("r0_r2", "r0", "r2", Cost(0));
  // choice_odd is open iff an odd number of clauses have open observation edges.
  if (m == 0) {
    directed("choice_odd", "r1", "r1p", Cost(0), Rational(1));
    directed("choice_even", "r2", "r2p", Cost(0), Rational(0));
  } else {
    auto odd = directed("choice_odd", "r1", "r1p", Cost(0), Rational(1, 2));
    auto even = directed("choice_even", "r2", "r2p", Cost(0), Rational(1, 2));
    std::size_t parity = net.add({"p1", std::nullopt, {clause_coin[0]}, copy_cpt(false)});
    for (int l = 2; l <= m; ++l)
      parity = net.add({"p" + std::to_string(l), std::nullopt, {parity, clause_coin[static_cast<std::size_t>(l - 1)]}, xor_cpt()});
    // parity = number of blocked clauses mod 2; odd-open iff (m - parity) is odd.
    bool m_odd = m % 2 == 1;
    net.add({"choice_odd", odd, {parity}, copy_cpt(!m_odd)});
    net.add({"choice_even", even, {parity}, copy_cpt(m_odd)});
  }
  directed("r1p_t", "r1p", "t", Cost(0));
  directed("r2p_t", "r2p", "t", Cost(0));
  directed("r1_t", "r1", "t", Cost(1));
  directed("r2_t", "r2", "t", Cost(1));
  inst.set_terminals("s", "t");
  return {validate_instance(inst), h};
}

// ---- QBF -> independent CTP ----------------------------------------------------------------

class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CtpCertificate {
  long long n = 0, m = 0;
  long long N = 0, N1 = 0;
  Rational L, p1, h;
  Rational D_pt, D_pt_published, D_st, P_r0, P_rt, B0, B1, q_st, w_st, z_st;
  bool separation_holds = false;
  std::size_t vertex_count = 0, edge_count = 0;
  bool padded = false;
};

inline Rational ctp_L(long long m) { return Rational(8 * m + 16); }

inline Rational ctp_p1(const Rational& L) {
  return Rational(1) - Rational::pow2(-ceil_log2((Rational(3) * L + Rational(1)) / Rational(2)));
}

/// Evaluates the constant chain for (n, m) without enforcing B0 < h < B1.
inline CtpCertificate compute_certificate(long long n, long long m) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("n must be even");
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  CtpCertificate c;
  c.n = n;
  c.m = m;
  c.L = ctp_L(m);
  c.p1 = ctp_p1(c.L);
  auto op = ObservationParams::from(c.L);
  c.N = op.N;
  c.N1 = op.N1;
  const Rational& L = c.L;
  Rational q_bg = series_stats(GadgetKind::Baiting, L, 1).q;
  Rational w1_bg = series_stats(GadgetKind::Baiting, L, 1).w1;
  Rational w2_bg = w2_bg1(L);
  auto og_m = series_stats(GadgetKind::Observation, L, m);
  Rational w2_ogm = w2_series(GadgetKind::Observation, L, m);
  Rational w1_og1 = series_stats(GadgetKind::Observation, L, 1).w1;
  Rational half_n = Rational(n / 2);
  Rational two_m1(2 * (m + 1));

  // Per variable: entry edge 1, m observation gadgets, closing edge 1.
  c.D_pt = Rational(1) + (Rational(2) + og_m.w1) * Rational(n) + Rational(n + m + 1) * L;
  c.D_pt_published = Rational(1) + (Rational(2) + (Rational(19 * m) * L + Rational(4)) / Rational(4)) * Rational(n) +
                     Rational(n + m + 1) * L;
  c.P_rt = (Rational(1) - c.p1).pow(3 * m + 2);
  Rational pair = q_bg * og_m.q * Rational(3, 4) * q_bg * og_m.q;
  c.P_r0 = pair.pow(n / 2) * series_stats(GadgetKind::Baiting, L, m + 2).q;
  c.q_st = q_bg * Rational(3, 4) * og_m.q * q_bg * og_m.q;
  c.w_st = Rational(2) * L + Rational(4) + Rational(2 * m) * w1_og1;
  Rational N2 = Rational::pow2(-op.N);
  c.z_st = w2_bg + N2 * (w1_bg + L / Rational(4) +
                         Rational(3, 4) * (Rational(1) + w2_ogm +
                                           og_m.q * (og_m.w1 + Rational(1) + w2_bg +
                                                     N2 * (w1_bg + Rational(1) + w2_ogm + og_m.q + Rational(1)))));
  Rational zbar = c.z_st + c.q_st * c.w_st;
  Rational D = zbar;
  for (long long k = 2; k <= n / 2; ++k) D = zbar + c.q_st * D;
  c.D_st = D + c.q_st.pow(n / 2) * w2_series(GadgetKind::Baiting, L, m + 1);
  Rational tail = c.P_rt * two_m1 + (Rational(1) - c.P_rt) * L;
  c.B0 = c.D_st + c.P_r0 * (c.D_pt + tail);
  Rational third = Rational(1, 3).pow(n / 2);
  c.B1 = c.D_st + c.P_r0 * (c.D_pt + third * L + (Rational(1) - third) * tail);
  c.h = c.B0 + Rational(1, 4).pow(n / 2) * Rational(m) * c.P_r0;
  c.separation_holds = c.B0 < c.h && c.h < c.B1;
  (void)half_n;
  return c;
}

/// As compute_certificate, but aborts unless B0 < h < B1.
inline CtpCertificate certificate(long long n, long long m) {
  auto c = compute_certificate(n, m);
  if (!c.separation_holds)
    throw CertificateError("certificate invariant B0 < h < B1 fails for n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                           ": B0=" + pretty(c.B0) + ", h=" + pretty(c.h) + ", B1=" + pretty(c.B1));
  return c;
}

struct CtpReduction {
  Instance instance;
  CtpCertificate cert;
  QbfFormula formula;  // after padding
  /// Edges of the deterministic full trip from s to r0 following the true paths.
  std::vector<std::string> full_trip;
};

/// Vertices r0 and r{i}.{j}; guard edges guard{i}.a/.b and clause edges clause{i} blocked with p1.
inline void build_exam_section(Instance& inst, long long m, const Rational& p1, const Rational& L, const std::string& t) {
  auto r = [](long long i, int j) { return "r" + std::to_string(i) + "." + std::to_string(j); };
  inst.ensure_vertex("r0");
  inst.ensure_vertex(t);
  for (long long i = 1; i <= m + 1; ++i)
    for (int j = 1; j <= 5; ++j) inst.ensure_vertex(r(i, j));
  inst.add_edge("exam.enter", "r0", r(1, 1), Cost(1));
  inst.add_edge("exam.shortcut", "r0", t, Cost(L));
  for (long long i = 1; i <= m + 1; ++i) {
    std::string k = std::to_string(i);
    inst.add_edge("guard" + k + ".a", r(i, 1), r(i, 2), Cost(0), p1);
    inst.add_edge("guard" + k + ".b", r(i, 2), r(i, 3), Cost(0), p1);
    inst.add_edge("exam" + k + ".link", r(i, 3), r(i, 4), Cost(1));
    inst.add_edge("clause" + k, r(i, 4), r(i, 5), Cost(0), i <= m ? p1 : Rational(0));
    if (i <= m)
      inst.add_edge("exam" + k + ".next", r(i, 5), r(i + 1, 1), Cost(1));
    else
      inst.add_edge("exam.exit", r(i, 5), t, Cost(0));
  }
}

inline CtpReduction qbf_to_ctp(const QbfFormula& input) {
  input.check();
  QbfFormula f = input;
  bool padded = false;
  if (f.n % 2 != 0) {
    ++f.n;  // trailing dummy variable in no clause; it is existential to keep the alternation
    padded = true;
  }
  long long n = f.n, m = f.m();
  if (m < 1) throw std::invalid_argument("formula needs at least one clause");
  auto cert = compute_certificate(n, m);
  cert.padded = padded;
  const Rational& L = cert.L;

  Instance inst;
  inst.add_vertex("s");
  inst.add_vertex("t");
  inst.add_edge("default", "s", "t", Cost(cert.h));
  std::vector<std::string> trip;
  std::vector<std::pair<std::string, std::string>> merges;  // (exam vertex, observation vertex)
  for (long long i = 1; i <= n; ++i) {
    std::string vi = "v" + std::to_string(i), vp = "vp" + std::to_string(i);
    inst.ensure_vertex(vi);
    inst.add_vertex(vp);
    if (i == 1) {
      inst.add_edge("s_v1", "s", vi, Cost(1));
      trip.push_back("s_v1");
    }
    bool universal = QbfFormula::is_universal(static_cast<int>(i));
    for (bool pos : {true, false}) {
      std::string tag = lit_tag(pos);
      std::string base = vi + "." + tag;
      for (long long l = 1; l <= m; ++l) {
        inst.add_vertex(base + std::to_string(l));
        inst.add_vertex(base + std::to_string(l) + "p");
      }
      std::string x = "x" + std::to_string(i) + "." + tag;
      inst.add_edge(x, vi, base + "1", Cost(1), universal ? Rational(1, 2) : Rational(0));
      if (pos) trip.push_back(x);
      for (long long l = 1; l <= m; ++l) {
        std::string entry = base + std::to_string(l), exit = entry + "p";
        std::string o = "o" + std::to_string(i) + "." + tag + std::to_string(l);
        inst.add_vertex(o);
        auto g = build_observation(inst, L, entry, exit, o, "t", "og" + std::to_string(i) + "." + tag + std::to_string(l));
        if (pos) trip.insert(trip.end(), g.route_edges.begin(), g.route_edges.end());
        if (f.contains(static_cast<int>(l - 1), pos ? static_cast<int>(i) : -static_cast<int>(i)))
          merges.emplace_back("r" + std::to_string(l) + ".5", o);
        if (l < m) {
          inst.add_edge(entry + ".next", exit, base + std::to_string(l + 1), Cost(0));
          if (pos) trip.push_back(entry + ".next");
        }
      }
      inst.add_edge(base + ".close", base + std::to_string(m) + "p", vp, Cost(1));
      if (pos) trip.push_back(base + ".close");
    }
    if (i < n) {
      auto g = build_baiting(inst, L, vp, "v" + std::to_string(i + 1), "t", "link" + std::to_string(i));
      trip.insert(trip.end(), g.route_edges.begin(), g.route_edges.end());
    }
  }

  build_exam_section(inst, m, cert.p1, L, "t");
  inst.add_vertex("z0");
  inst.add_edge("vpn_z0", "vp" + std::to_string(n), "z0", Cost(0));
  trip.push_back("vpn_z0");
  for (long long l = 1; l <= m + 2; ++l) {
    std::string z = "z" + std::to_string(l);
    auto g = build_baiting(inst, L, "z" + std::to_string(l - 1), z, "t", "gs" + std::to_string(l));
    trip.insert(trip.end(), g.route_edges.begin(), g.route_edges.end());
    if (l <= m + 1) merges.emplace_back("r" + std::to_string(l) + ".2", z);
  }
  inst.add_edge("z_r0", "z" + std::to_string(m + 2), "r0", Cost(0));
  trip.push_back("z_r0");
  inst.set_terminals("s", "t");

  for (const auto& [keep, drop] : merges) inst = merge_vertices(inst, keep, drop);
  inst = validate_instance(inst);
  cert.vertex_count = inst.vertex_count();
  cert.edge_count = inst.edge_count();
  return {std::move(inst), cert, f, std::move(trip)};
}

/// Walks the named edges from `start`; returns the summed cost and the final vertex.
inline std::pair<Rational, VertexId> route_cost(const Instance& inst, VertexId start, const std::vector<std::string>& edges) {
  Rational total(0);
  VertexId at = start;
  for (const auto& id : edges) {
    const auto& spec = inst.edge_spec(inst.edge(id));
    if (!spec.usable_from(at)) throw InstanceError("route edge '" + id + "' does not leave " + inst.vertex_name(at));
    total += spec.cost.value();
    at = spec.other(at);
  }
  return {total, at};
}

// ---- normalization to cost-0, probability-1/2 uncertain edges --------------------------------

namespace detail {

/// z with p == 2^-z, if any.
inline std::optional<long long> dyadic_exponent(const Rational& p) {
  if (p.sign() <= 0 || p >= Rational(1) || p.numerator() != 1) return std::nullopt;
  Rational::Integer d = p.denominator();
  long long z = 0;
  while (d > 1) {
    if (d % 2 != 0) return std::nullopt;
    d /= 2;
    ++z;
  }
  return z;
}

}  // namespace detail

/// Replaces each uncertain edge: blocking 1 - 2^-z becomes a series chain of z coins, blocking 2^-z
/// becomes z parallel coins; a costed uncertain edge keeps its cost on a sure edge after the coins.
inline Instance normalize_half_prob(const Instance& inst) {
  if (inst.variant() != Variant::Independent) throw InstanceError("normalization needs an independent instance");
  Instance out;
  for (const auto& name : inst.vertex_names()) out.add_vertex(name);
  for (const auto& e : inst.edges()) {
    if (!e.uncertain() || (e.block_p == Rational(1, 2) && e.cost == Cost(0))) {
      out.add_edge(e);
      continue;
    }
    if (e.directed) throw InstanceError("edge '" + e.id + "': directed uncertain edges cannot be normalized");
    auto series = detail::dyadic_exponent(Rational(1) - e.block_p);
    auto parallel = detail::dyadic_exponent(e.block_p);
    if (!series && !parallel)
      throw InstanceError("edge '" + e.id + "': blocking probability " + e.block_p.str() + " is not 1-2^-z or 2^-z");
    std::string tail = inst.vertex_name(e.tail), head = inst.vertex_name(e.head);
    std::string coin_end = head;
    if (e.cost != Cost(0)) {
      coin_end = e.id + ".w";
      out.add_vertex(coin_end);
    }
    if (series) {
      std::string at = tail;
      for (long long k = 1; k <= *series; ++k) {
        std::string next = k == *series ? coin_end : e.id + ".w" + std::to_string(k);
        if (k < *series) out.add_vertex(next);
        out.add_edge(e.id + ".c" + std::to_string(k), at, next, Cost(0), Rational(1, 2));
        at = next;
      }
    } else {
      for (long long k = 1; k <= *parallel; ++k) out.add_edge(e.id + ".c" + std::to_string(k), tail, coin_end, Cost(0), Rational(1, 2));
    }
    if (e.cost != Cost(0)) out.add_edge(e.id + ".cost", coin_end, head, e.cost);
  }
  out.set_source(inst.source());
  out.set_target(inst.target());
  return validate_instance(out);
}

// ---- vertex cover -> sensing CTP -----------------------------------------------------------

struct VcInstance {
  std::vector<std::string> vertices;
  std::vector<std::pair<std::string, std::string>> edges;
  long long k = 0;

  void check() const {
    if (k < 0) throw std::invalid_argument("cover budget k must be non-negative");
    std::set<std::string> names(vertices.begin(), vertices.end());
    if (names.size() != vertices.size()) throw std::invalid_argument("duplicate vertex in cover instance");
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& [a, b] : edges) {
      if (a == b) throw std::invalid_argument("cover instance has a self-loop at '" + a + "'");
      if (!names.count(a) || !names.count(b)) throw std::invalid_argument("cover edge references an unknown vertex");
      if (!seen.insert(std::minmax(a, b)).second) throw std::invalid_argument("cover instance has a parallel edge");
    }
  }

  bool is_cover(const std::vector<std::string>& cover) const {
    std::set<std::string> c(cover.begin(), cover.end());
    for (const auto& [a, b] : edges)
      if (!c.count(a) && !c.count(b)) return false;
    return true;
  }

  /// Subset enumeration.
  bool has_cover_of_size(long long size) const {
    std::size_t V = vertices.size();
    if (V > 24) throw CapExceeded("cover enumeration", CapExceeded::kUnbounded, 24);
    for (std::size_t mask = 0; mask < (std::size_t{1} << V); ++mask) {
      if (static_cast<long long>(__builtin_popcountll(mask)) > size) continue;
      std::vector<std::string> c;
      for (std::size_t i = 0; i < V; ++i)
        if ((mask >> i) & 1U) c.push_back(vertices[i]);
      if (is_cover(c)) return true;
    }
    return false;
  }

  static VcInstance path3(long long k) { return {{"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}, k}; }
  static VcInstance triangle(long long k) { return {{"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}}, k}; }
};

struct SensingCertificate {
  Rational epsilon, C, L, alpha;
  long long k = 0;
  long long precision = 32;
  Rational g_ub, g1_lb, g2_ub;
  Rational voi;
};

struct SensingReduction {
  Instance instance;
  SensingCertificate cert;
};

inline std::string coin_id(const std::string& a, const std::string& b) { return "f:" + a + "-" + b; }

/// Largest k / 2^precision with (1-eps)^edges (K+1) >= K+1-alpha.
inline Rational sensing_epsilon(long long edges, long long K, const Rational& alpha, long long precision) {
  if (precision < 1 || precision > 62) throw std::invalid_argument("precision must be in [1, 62] bits");
  Rational rhs = Rational(K + 1) - alpha;
  auto ok = [&](long long num) {
    Rational eps = Rational(num) * Rational::pow2(-precision);
    return (Rational(1) - eps).pow(edges) * Rational(K + 1) >= rhs;
  };
  long long lo = 0, hi = (1LL << precision) - 1;  // ok(lo) holds
  while (lo < hi) {
    long long mid = lo + (hi - lo + 1) / 2;
    if (ok(mid))
      lo = mid;
    else
      hi = mid - 1;
  }
  if (lo == 0) throw std::invalid_argument("precision too small for a positive epsilon");
  return Rational(lo) * Rational::pow2(-precision);
}

/// s with default edge (s,t) cost 4; f:{v} per vertex reached by to:{v} (cost C) with infinite inf:{v}
/// to t; sensing path s -lead(L)- sp0 - coins f:{a}-{b} (blocking eps) - u with infinite u_t; and
/// s -s_x(2)- x -x_t(0, blocking 1/2)- t. Sensing is free from f:{v} to coins of edges at v and
/// from u to x_t.
inline SensingReduction vc_to_sensing(const VcInstance& vc, const Rational& alpha, long long precision = 32) {
  vc.check();
  if (alpha.sign() <= 0 || alpha >= Rational(1)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (vc.edges.empty()) throw std::invalid_argument("cover instance needs at least one edge");
  long long E = static_cast<long long>(vc.edges.size()), k = vc.k;
  SensingCertificate cert;
  cert.alpha = alpha;
  cert.k = k;
  cert.precision = precision;
  cert.epsilon = sensing_epsilon(E, k, alpha, precision);
  const Rational& eps = cert.epsilon;
  Rational open_all = (Rational(1) - eps).pow(E);
  cert.L = Rational(1, 2) - eps / Rational(4);
  Rational denom = Rational(2 * k + 1) - alpha;
  cert.C = eps * open_all / (Rational(2) * denom);
  cert.g_ub = -eps / Rational(2);
  cert.g1_lb = eps * open_all * (Rational(1, 2) - Rational(2 * k) / (Rational(2) * denom));
  cert.g2_ub = eps * open_all * (Rational(1, 2) - Rational(2) * (Rational(k + 1) - alpha) / (Rational(2) * denom));

  Instance inst;
  inst.set_variant(Variant::Sensing);
  inst.add_vertex("s");
  inst.add_vertex("t");
  inst.add_edge("default", "s", "t", Cost(4));
  for (const auto& v : vc.vertices) {
    inst.add_vertex("f:" + v);
    inst.add_edge("to:" + v, "s", "f:" + v, Cost(cert.C));
    inst.add_edge("inf:" + v, "f:" + v, "t", Cost::infinite());
  }
  inst.add_vertex("sp0");
  inst.add_edge("lead", "s", "sp0", Cost(cert.L));
  std::vector<EdgeId> coins;
  for (long long i = 0; i < E; ++i) {
    std::string from = "sp" + std::to_string(i);
    std::string to = i + 1 < E ? "sp" + std::to_string(i + 1) : "u";
    inst.add_vertex(to);
    const auto& [a, b] = vc.edges[static_cast<std::size_t>(i)];
    coins.push_back(inst.add_edge(coin_id(a, b), from, to, Cost(0), eps));
  }
  inst.add_edge("u_t", "u", "t", Cost::infinite());
  inst.add_vertex("x");
  inst.add_edge("s_x", "s", "x", Cost(2));
  auto xt = inst.add_edge("x_t", "x", "t", Cost(0), Rational(1, 2));
  for (long long i = 0; i < E; ++i) {
    const auto& [a, b] = vc.edges[static_cast<std::size_t>(i)];
    inst.sensing().entries[{inst.vertex("f:" + a), coins[static_cast<std::size_t>(i)]}] = Cost(0);
    inst.sensing().entries[{inst.vertex("f:" + b), coins[static_cast<std::size_t>(i)]}] = Cost(0);
  }
  inst.sensing().entries[{inst.vertex("u"), xt}] = Cost(0);
  inst.set_terminals("s", "t");

  // Value of learning x_t before committing at s: default versus trying x.
  const auto& sx = inst.edge_spec(inst.edge("s_x"));
  const auto& x = inst.edge_spec(xt);
  Rational open_x = Rational(1) - x.block_p;
  cert.voi = Rational(4) - (open_x * (sx.cost.value() + x.cost.value()) + x.block_p * Rational(4));
  return {validate_instance(inst), cert};
}

/// 2C * cover_size * (1-eps)^|E|.
inline Rational sensing_cost_bound(const VcInstance& vc, long long cover_size, const SensingCertificate& cert) {
  if (cover_size < 0) throw std::invalid_argument("cover size must be non-negative");
  return Rational(2) * cert.C * Rational(cover_size) * (Rational(1) - cert.epsilon).pow(static_cast<long long>(vc.edges.size()));
}

}  // namespace ctplab
