#pragma once

#include "ctplab/gadgets.hpp"
#include "ctplab/io.hpp"
#include "ctplab/random_instances.hpp"
#include "ctplab/reductions.hpp"
#include "ctplab/reference_policies.hpp"
#include "ctplab/solve.hpp"

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

namespace ctplab {

struct VerifyCheck {
  std::string id;
  bool pass = false;
  std::string expected;
  std::string actual;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;
  double wall_seconds = 0;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void add(std::string id, bool ok, std::string expected, std::string actual) {
    checks.push_back({std::move(id), ok, std::move(expected), std::move(actual)});
  }

  /// Records an exception from a check as a failure instead of aborting the suite.
  template <class F>
  void guard(const std::string& id, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      add(id, false, "no error", std::string("error: ") + e.what());
    }
  }

  json to_json() const {
    json cs = json::array();
    for (const auto& c : checks)
      cs.push_back({{"id", c.id}, {"status", c.pass ? "pass" : "fail"}, {"expected", c.expected}, {"actual", c.actual}});
    return {{"suite", suite}, {"status", pass() ? "pass" : "fail"}, {"checks", cs}, {"wall_seconds", wall_seconds}};
  }

  void print(std::ostream& os) const {
    for (const auto& c : checks) {
      os << (c.pass ? "PASS " : "FAIL ") << c.id;
      if (!c.pass) os << "  expected " << c.expected << ", got " << c.actual;
      os << "\n";
    }
    std::size_t passed = 0;
    for (const auto& c : checks) passed += c.pass;
    os << suite << ": " << passed << "/" << checks.size() << " checks passed (" << (pass() ? "pass" : "fail") << ")\n";
  }
};

struct VerifyOptions {
  std::optional<Rational> L;
  long long n = 2, m = 1;
  std::optional<VcInstance> graph;
  Rational alpha{1, 2};
  long long precision = 32;
  std::uint64_t seed = 1;
  std::size_t trials = 25;
  std::size_t cap = kDefaultWeatherCap;
  std::vector<QbfFormula> formulas;
};

namespace detail {

inline std::string str_bool(bool b) { return b ? "true" : "false"; }

template <class F>
VerifyReport timed(const std::string& name, F&& body) {
  VerifyReport r;
  r.suite = name;
  auto t0 = std::chrono::steady_clock::now();
  body(r);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::string first_action_text(const Instance& inst, const OptResult& r) {
  return r.optimal_first_action ? describe(inst, *r.optimal_first_action, r.first_belief.position) : "none";
}

}  // namespace detail

/// Exact checks of the inequality chain against the retreat policies at one L.
inline void check_baiting_chain(VerifyReport& r, const Rational& L, const std::string& tag) {
  auto bp = BaitingParams::from(L);
  Rational c = baiting_C_pi(L, L);
  r.add(tag + ".C_pi<3/4", c < Rational(3, 4), "< 3/4", c.str());
  long long worst = 0;
  for (long long j = 1; j <= bp.N; ++j)
    if (!(c < baiting_C_pi_j(L, j, Rational(1)))) {
      worst = j;
      break;
    }
  r.add(tag + ".C_pi<C_pi_j(all j)", worst == 0, "holds for j=1.." + std::to_string(bp.N),
        worst == 0 ? "holds" : "fails at j=" + std::to_string(worst));
}

inline void check_observation_inequalities(VerifyReport& r, const Rational& L, const Rational& p1, const std::string& tag) {
  auto op = ObservationParams::from(L);
  Rational L1 = op.L1, threeHalf = Rational(3) * L / Rational(2);
  r.add(tag + ".2L1+2<3L/2", Rational(2) * L1 + Rational(2) < threeHalf, "< " + threeHalf.str(),
        (Rational(2) * L1 + Rational(2)).str());
  Rational chain = Rational(2) * L1 + Rational(3) * L1 / Rational(4) + L1;
  r.add(tag + ".3L/2<2L1+3L1/4+L1", threeHalf < chain, "> " + threeHalf.str(), chain.str());
  Rational bound = Rational(1) - Rational(2) / (Rational(3) * L + Rational(1));
  r.add(tag + ".p1>1-2/(3L+1)", p1 > bound, "> " + bound.str(), p1.str());
  Rational Cp = L1 + Rational(2);
  Rational rhs = Rational(1) + p1 * (Rational(1) + Cp);
  r.add(tag + ".C'<1+p1(1+C')", Cp < rhs, "> " + Cp.str(), rhs.str());
}

inline VerifyReport verify_gadgets(const VerifyOptions& o) {
  return detail::timed("gadgets", [&](VerifyReport& r) {
    Rational L = o.L.value_or(Rational(2));
    r.guard("baiting.optimum", [&] {
      auto inst = build_baiting_harness(L, L);
      auto opt = solve_independent(inst, {o.cap});
      Rational c = baiting_C_pi(L, L);
      r.add("baiting.optimum.optimal_cost", opt.optimal_cost == Cost(c), c.str(), opt.optimal_cost.str());
      auto fa = detail::first_action_text(inst, opt);
      r.add("baiting.optimum.first_action", fa == "Move(u,bg.v1)", "Move(u,bg.v1)", fa);
      auto ev = evaluate_exact(inst, reference_policy("baiting_pi", {{"L", L.str()}}), {EvalMode::Tree, o.cap});
      r.add("baiting.optimum.baiting_pi", ev.expected_cost == Cost(c), c.str(), ev.expected_cost.str());
      auto s1 = series_stats(GadgetKind::Baiting, L, 1);
      Rational ident = w2_bg1(L) + s1.q * (s1.w1 + L);
      r.add("baiting.optimum.series-identity", ident == c, c.str(), ident.str());
    });
    r.guard("baiting-chain", [&] { check_baiting_chain(r, L, "baiting-chain.L=" + L.str()); });
    for (long long m = 1; m <= 8; ++m) {
      Rational Lm = ctp_L(m);
      r.guard("baiting-chain.m=" + std::to_string(m), [&] { check_baiting_chain(r, Lm, "baiting-chain.L=" + Lm.str()); });
      r.guard("observation.m=" + std::to_string(m), [&] { check_observation_inequalities(r, Lm, ctp_p1(Lm), "observation.L=" + Lm.str()); });
    }
  });
}

/// Small mix of satisfiable and unsatisfiable formulas with n in {2, 4} and m <= 3.
inline std::vector<QbfFormula> default_qbf_suite() {
  auto mk = [](int n, std::vector<std::vector<int>> cl) {
    QbfFormula f;
    f.n = n;
    f.clauses = std::move(cl);
    f.check();
    return f;
  };
  return {
      mk(2, {{1, 2}}),
      mk(2, {{1, 2}, {-1, 2}}),
      mk(2, {{1, 2}, {1, -2}}),
      mk(2, {{1}, {2}}),
      mk(2, {{1, 2}, {-1, -2}}),
      mk(2, {{1, 2}, {-1, 2}, {-2}}),
      mk(4, {{1, 2, 3}, {-1, -2, 4}, {3, 4}}),
      mk(4, {{1, 3}, {-1, 4}, {-3, -4}}),
      mk(4, {{2, 4}, {-2, -4}}),
      mk(4, {{1, 2}, {3, 4}, {-3, 4}}),
  };
}

inline VerifyReport verify_ctpdep(const VerifyOptions& o) {
  return detail::timed("ctpdep", [&](VerifyReport& r) {
    auto formulas = o.formulas.empty() ? default_qbf_suite() : o.formulas;
    for (std::size_t i = 0; i < formulas.size(); ++i) {
      const auto& f = formulas[i];
      std::string tag = "ctpdep.f" + std::to_string(i + 1);
      r.guard(tag, [&] {
        bool sat = qbf_eval(f);
        auto red = qbf_to_ctpdep(f);
        auto opt = solve_dependent(red.instance, {o.cap});
        std::string want = sat ? "Move(s,v1)" : "Move(s,t)";
        auto got = detail::first_action_text(red.instance, opt);
        r.add(tag + (sat ? ".sat" : ".unsat") + ".first_action", got == want, want, got);
        if (sat) {
          r.add(tag + ".optimal_cost", opt.optimal_cost == Cost(0), "0/1", opt.optimal_cost.str());
          json p{{"n", f.n}, {"clauses", f.clauses}};
          auto ev = evaluate_exact(red.instance, reference_policy("assignment", p), {EvalMode::Tree, o.cap});
          r.add(tag + ".assignment_policy", ev.expected_cost == Cost(0), "0/1", ev.expected_cost.str());
        } else {
          r.add(tag + ".optimal_cost", opt.optimal_cost == Cost(red.h), red.h.str(), opt.optimal_cost.str());
        }
      });
    }
  });
}

inline VerifyReport verify_ctp_cert(const VerifyOptions& o) {
  return detail::timed("ctp-cert", [&](VerifyReport& r) {
    r.guard("cert", [&] {
      auto c = compute_certificate(o.n, o.m);
      std::string tag = "cert.n=" + std::to_string(o.n) + ",m=" + std::to_string(o.m);
      r.add(tag + ".L=8m+16", c.L == ctp_L(o.m), ctp_L(o.m).str(), c.L.str());
      r.add(tag + ".B0<h", c.B0 < c.h, "h-B0 > 0", "h-B0 = " + (c.h - c.B0).decimal());
      r.add(tag + ".h<B1", c.h < c.B1, "h-B1 < 0", "h-B1 = " + (c.h - c.B1).decimal());
      Rational gap = Rational(1, 4).pow(o.n / 2) * Rational(o.m) * c.P_r0;
      r.add(tag + ".h-B0", c.h - c.B0 == gap, gap.str(), (c.h - c.B0).str());
      Rational bound = Rational(1) - Rational(2) / (Rational(3) * c.L + Rational(1));
      r.add(tag + ".p1", c.p1 > bound, "> " + bound.str(), c.p1.str());
    });
    if (o.n <= 4 && o.m <= 2) {
      r.guard("dpt", [&] {
        QbfFormula f;
        f.n = static_cast<int>(o.n);
        for (long long l = 0; l < o.m; ++l) f.clauses.push_back({static_cast<int>(l % o.n) + 1});
        auto red = qbf_to_ctp(f);
        auto [trip, end] = route_cost(red.instance, red.instance.source(), red.full_trip);
        r.add("dpt.full-trip", trip == red.cert.D_pt && red.instance.vertex_name(end) == "r0", red.cert.D_pt.str() + " at r0",
              trip.str() + " at " + red.instance.vertex_name(end));
      });
    }
  });
}

inline VerifyReport verify_sensing(const VerifyOptions& o) {
  return detail::timed("sensing", [&](VerifyReport& r) {
    VcInstance vc = o.graph.value_or(VcInstance::triangle(1));
    r.guard("sensing", [&] {
      auto red = vc_to_sensing(vc, o.alpha, o.precision);
      bool cover = vc.has_cover_of_size(vc.k);
      auto opt = solve_sensing(red.instance, {o.cap});
      auto fa = detail::first_action_text(red.instance, opt);
      bool is_default = fa == "Move(s,t)";
      r.add(std::string("sensing.first_action.") + (cover ? "cover" : "no-cover"), cover != is_default,
            cover ? "not Move(s,t)" : "Move(s,t)", fa);
      r.add("sensing.g1_lb>0", red.cert.g1_lb.sign() > 0, "> 0", red.cert.g1_lb.str());
      r.add("sensing.g2_ub<0", red.cert.g2_ub.sign() < 0, "< 0", red.cert.g2_ub.str());
      bool eq = (opt.optimal_cost < Cost(4)) == cover;
      r.add("sensing.equivalence", eq, cover ? "optimal < 4" : "optimal = 4", opt.optimal_cost.str());
    });
  });
}

inline VerifyReport verify_oracle(const VerifyOptions& o) {
  return detail::timed("oracle", [&](VerifyReport& r) {
    std::mt19937_64 rng(o.seed);
    std::size_t bad_disjoint = 0, bad_tree = 0, bad_norm = 0;
    std::string first_bad;
    for (std::size_t i = 0; i < o.trials; ++i) {
      auto inst = random_disjoint_instance(rng);
      auto a = solve_disjoint_bruteforce(inst).optimal_cost;
      auto b = solve_independent(inst, {o.cap}).optimal_cost;
      if (a != b && bad_disjoint++ == 0) first_bad = "disjoint #" + std::to_string(i) + ": " + a.str() + " vs " + b.str();
    }
    r.add("oracle.disjoint-bruteforce", bad_disjoint == 0, "0 mismatches", std::to_string(bad_disjoint) + " mismatches");
    ToyOptions toy;
    toy.max_uncertain = 5;
    for (std::size_t i = 0; i < o.trials; ++i) {
      auto inst = random_toy_instance(rng, toy);
      auto opt = solve_independent(inst, {o.cap});
      auto d = tree_decider(opt.policy);
      auto tree = evaluate_exact(inst, d, {EvalMode::Tree, o.cap}).expected_cost;
      auto weather = evaluate_exact(inst, d, {EvalMode::Weather, o.cap}).expected_cost;
      if ((tree != weather || tree != opt.optimal_cost) && bad_tree++ == 0)
        first_bad = "toy #" + std::to_string(i) + ": " + tree.str() + " vs " + weather.str();
      auto norm = solve_independent(normalize_half_prob(inst), {o.cap}).optimal_cost;
      if (norm != opt.optimal_cost && bad_norm++ == 0)
        first_bad = "normalized #" + std::to_string(i) + ": " + norm.str() + " vs " + opt.optimal_cost.str();
    }
    r.add("oracle.tree-vs-weather", bad_tree == 0, "0 mismatches", std::to_string(bad_tree) + " mismatches");
    r.add("oracle.normalization", bad_norm == 0, "0 mismatches", std::to_string(bad_norm) + " mismatches");
    if (!first_bad.empty()) r.add("oracle.first-mismatch", false, "none", first_bad);
  });
}

inline std::vector<std::string> verify_suite_names() { return {"gadgets", "ctpdep", "ctp-cert", "sensing", "oracle"}; }

inline VerifyReport run_verify(const std::string& suite, const VerifyOptions& o) {
  if (suite == "gadgets") return verify_gadgets(o);
  if (suite == "ctpdep") return verify_ctpdep(o);
  if (suite == "ctp-cert") return verify_ctp_cert(o);
  if (suite == "sensing") return verify_sensing(o);
  if (suite == "oracle") return verify_oracle(o);
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

}  // namespace ctplab
