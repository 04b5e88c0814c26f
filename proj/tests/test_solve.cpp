#include "ctplab/random_instances.hpp"
#include "ctplab/reductions.hpp"
#include "ctplab/reference_policies.hpp"
#include "ctplab/solve.hpp"

#include <gtest/gtest.h>

using namespace ctplab;

namespace {

std::string first(const Instance& inst, const OptResult& r) {
  return r.optimal_first_action ? describe(inst, *r.optimal_first_action, r.first_belief.position) : "none";
}

Instance two_paths() {
  Instance inst;
  inst.add_vertex("s");
  inst.add_vertex("t");
  inst.add_edge("cheap", "s", "t", Cost(1), Rational(1, 2));
  inst.add_edge("sure", "s", "t", Cost(3));
  inst.set_terminals("s", "t");
  return validate_instance(inst);
}

}  // namespace

TEST(SolveIndependent, SureEdge) {
  Instance inst;
  inst.add_vertex("s");
  inst.add_vertex("t");
  inst.add_edge("st", "s", "t", Cost(5));
  inst.set_terminals("s", "t");
  auto r = solve_independent(validate_instance(inst));
  EXPECT_EQ(r.optimal_cost, Cost(5));
  EXPECT_EQ(first(inst, r), "Move(s,t)");
}

TEST(SolveIndependent, TwoPathsObservedAtSource) {
  auto inst = two_paths();
  EXPECT_EQ(solve_independent(inst).optimal_cost, Cost(2));
  EXPECT_EQ(solve_disjoint_bruteforce(inst).optimal_cost, Cost(2));
}

TEST(SolveIndependent, InfiniteWhenSomeWeatherDisconnects) {
  Instance inst;
  inst.add_vertex("s");
  inst.add_vertex("t");
  inst.add_edge("only", "s", "t", Cost(1), Rational(1, 2));
  inst.set_terminals("s", "t");
  EXPECT_TRUE(solve_independent(validate_instance(inst)).optimal_cost.is_infinite());
}

TEST(SolveIndependent, RecourseRequiresReturning) {
  // s -a(1)- x -b(0, blocked 1/2)- t, plus sure s-t of cost 4: try x, come back if b is blocked.
  Instance inst;
  for (auto n : {"s", "x", "t"}) inst.add_vertex(n);
  inst.add_edge("a", "s", "x", Cost(1));
  inst.add_edge("b", "x", "t", Cost(0), Rational(1, 2));
  inst.add_edge("d", "s", "t", Cost(4));
  inst.set_terminals("s", "t");
  auto r = solve_independent(validate_instance(inst));
  EXPECT_EQ(r.optimal_cost, Cost(Rational(1, 2) * Rational(1) + Rational(1, 2) * Rational(6)));
  EXPECT_EQ(first(inst, r), "Move(s,x)");
}

TEST(SolveIndependent, PolicyEvaluatesToOptimumAndIsStable) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    auto inst = random_toy_instance(rng);
    auto a = solve_independent(inst);
    auto b = solve_independent(inst);
    EXPECT_EQ(a.optimal_cost, b.optimal_cost);
    EXPECT_EQ(evaluate_exact(inst, tree_decider(a.policy)).expected_cost, a.optimal_cost);
  }
}

TEST(SolveIndependent, CapExceeded) {
  auto inst = build_baiting_harness(Rational(2), Rational(2));
  EXPECT_THROW(solve_independent(inst, {10}), CapExceeded);
}

TEST(SolveIndependent, RejectsOtherVariants) {
  QbfFormula f;
  f.n = 2;
  f.clauses = {{1, 2}};
  EXPECT_THROW(solve_independent(qbf_to_ctpdep(f).instance), InstanceError);
}

TEST(SolveDependent, FirstMoveTracksSatisfiability) {
  QbfFormula sat;
  sat.n = 2;
  sat.clauses = {{1, 2}, {-1, 2}};
  auto a = qbf_to_ctpdep(sat, {Rational(1, 16)});
  auto ra = solve_dependent(a.instance);
  EXPECT_EQ(first(a.instance, ra), "Move(s,v1)");
  EXPECT_EQ(ra.optimal_cost, Cost(0));

  QbfFormula unsat = sat;
  unsat.clauses = {{1, 2}, {1, -2}};
  auto b = qbf_to_ctpdep(unsat, {Rational(1, 16)});
  auto rb = solve_dependent(b.instance);
  EXPECT_EQ(first(b.instance, rb), "Move(s,t)");
  EXPECT_EQ(rb.optimal_cost, Cost(Rational(1, 16)));
}

TEST(SolveDependent, ExclusivePairPosteriorCollapses) {
  // Two complementary edges from s: seeing one decides the other.
  Instance inst;
  inst.set_variant(Variant::Dependent);
  for (auto n : {"s", "a", "t"}) inst.add_vertex(n);
  auto e1 = inst.add_edge("sa", "s", "a", Cost(0), Rational(1, 2), true);
  auto e2 = inst.add_edge("at", "a", "t", Cost(0), Rational(1, 2), true);
  inst.add_edge("d", "s", "t", Cost(1), Rational(0), true);
  auto c = inst.dependency().add({"sa", e1, {}, coin_cpt(Rational(1, 2))});
  inst.dependency().add({"at", e2, {c}, copy_cpt(true)});
  inst.set_terminals("s", "t");
  auto r = solve_dependent(validate_instance(inst));
  // sa open implies at blocked: never worth entering a.
  EXPECT_EQ(r.optimal_cost, Cost(1));
  for (const auto& w : weather_support(inst)) EXPECT_NE(w.status[e1], w.status[e2]);
}

TEST(SolveSensing, FreeSenseOfOnlyUncertainEdge) {
  Instance inst;
  inst.set_variant(Variant::Sensing);
  for (auto n : {"s", "x", "t"}) inst.add_vertex(n);
  inst.add_edge("sx", "s", "x", Cost(1));
  auto xt = inst.add_edge("xt", "x", "t", Cost(0), Rational(1, 2));
  inst.add_edge("d", "s", "t", Cost(3));
  inst.sensing().entries[{inst.vertex("s"), xt}] = Cost(0);
  inst.set_terminals("s", "t");
  auto r = solve_sensing(validate_instance(inst));
  EXPECT_EQ(r.optimal_cost, Cost(2));
  EXPECT_EQ(first(inst, r), "Sense(x,t)");
}

TEST(SolveSensing, DefaultMoveExactlyWithoutCover) {
  auto p3 = vc_to_sensing(VcInstance::path3(1), Rational(1, 2));
  auto rp = solve_sensing(p3.instance);
  EXPECT_NE(first(p3.instance, rp), "Move(s,t)");
  EXPECT_LT(rp.optimal_cost, Cost(4));
  auto k3 = vc_to_sensing(VcInstance::triangle(1), Rational(1, 2));
  auto rk = solve_sensing(k3.instance);
  EXPECT_EQ(first(k3.instance, rk), "Move(s,t)");
  EXPECT_EQ(rk.optimal_cost, Cost(4));
  // Cover policy is optimal on P3 with its size-1 cover.
  EXPECT_EQ(evaluate_exact(p3.instance, reference_policy("vc_cover", {{"cover", {"b"}}})).expected_cost, rp.optimal_cost);
}

TEST(Disjoint, BruteforceMatchesExactSolver) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 40; ++i) {
    auto inst = random_disjoint_instance(rng);
    EXPECT_EQ(solve_disjoint_bruteforce(inst).optimal_cost, solve_independent(inst).optimal_cost) << i;
  }
}

TEST(Disjoint, RejectsOtherTopologies) {
  auto inst = build_baiting_harness(Rational(2), Rational(2));
  EXPECT_THROW(solve_disjoint_bruteforce(inst), InstanceError);
}
