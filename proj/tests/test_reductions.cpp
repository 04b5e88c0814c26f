#include "ctplab/reductions.hpp"
#include "ctplab/solve.hpp"

#include <gtest/gtest.h>

using namespace ctplab;

namespace {

QbfFormula make(int n, std::vector<std::vector<int>> clauses) {
  QbfFormula f;
  f.n = n;
  f.clauses = std::move(clauses);
  return f;
}

}  // namespace

TEST(CtpDep, ObservationEdgesFollowClauseMembership) {
  auto red = qbf_to_ctpdep(make(2, {{1, 2}}));
  EXPECT_EQ(red.h, Rational(1, 8));
  std::vector<std::string> obs;
  for (const auto& e : red.instance.edges())
    if (e.id.rfind("obs", 0) == 0) obs.push_back(e.id);
  std::sort(obs.begin(), obs.end());
  EXPECT_EQ(obs, (std::vector<std::string>{"obs1.T1", "obs2.T1"}));
}

TEST(CtpDep, VertexCountMatchesLayout) {
  // s, t; per variable v_i, 2m path vertices and v'_i; one o vertex per literal occurrence;
  // exam vertices r0, r1, r1', r2, r2'.
  for (auto f : {make(2, {{1, 2}}), make(2, {{1, 2}, {-1, -2}}), make(4, {{1, 2, 3}, {-1, 4}, {2}})}) {
    auto red = qbf_to_ctpdep(f);
    std::size_t occurrences = 0;
    for (const auto& c : f.clauses) occurrences += c.size();
    std::size_t want = 2 + static_cast<std::size_t>(f.n) * (2 + 2 * f.m()) + occurrences + 5;
    EXPECT_EQ(red.instance.vertex_count(), want) << f.to_qdimacs();
  }
}

TEST(CtpDep, HRegime) {
  EXPECT_THROW(qbf_to_ctpdep(make(2, {{1, 2}}), {Rational(1, 4)}), std::invalid_argument);
  EXPECT_NO_THROW(qbf_to_ctpdep(make(2, {{1, 2}}), {Rational(1, 5)}));
  EXPECT_EQ(ctpdep_default_h(4), Rational(1, 16));
}

TEST(CtpDep, EndToEndAgreesWithQbfOracle) {
  std::vector<QbfFormula> fs = {make(2, {{1, 2}}), make(2, {{1}, {2}}), make(2, {{1, 2}, {-1, -2}}),
                                make(2, {{-1, 2}, {1, -2}}), make(4, {{2, 4}, {-2, -4}}), make(4, {{1, 3}, {2}, {-2, 4}})};
  for (const auto& f : fs) {
    auto red = qbf_to_ctpdep(f);
    auto r = solve_dependent(red.instance);
    bool moves_in = r.optimal_first_action && describe(red.instance, *r.optimal_first_action, r.first_belief.position) == "Move(s,v1)";
    EXPECT_EQ(moves_in, qbf_eval(f)) << f.to_qdimacs();
  }
}

TEST(Certificate, ParametersForSmallestCase) {
  auto c = compute_certificate(2, 1);
  EXPECT_EQ(c.L, Rational(24));
  EXPECT_EQ(c.p1, Rational(63, 64));
  EXPECT_GT(c.p1, Rational(1) - Rational(2, 73));
  EXPECT_EQ(c.N, 127);
  EXPECT_EQ(c.N1, 255);
  EXPECT_EQ(c.D_pt, Rational(331));
  EXPECT_EQ(c.P_rt, (Rational(1) - c.p1).pow(5));
  EXPECT_THROW(compute_certificate(3, 1), std::invalid_argument);
}

TEST(Certificate, GapIdentityAndSeparation) {
  for (long long n = 2; n <= 8; n += 2)
    for (long long m = 1; m <= 8; ++m) {
      auto c = compute_certificate(n, m);
      EXPECT_EQ(c.h - c.B0, Rational(1, 4).pow(n / 2) * Rational(m) * c.P_r0);
      EXPECT_EQ(c.separation_holds, c.B0 < c.h && c.h < c.B1);
    }
}

TEST(Certificate, EnforcingVersionReportsTheChain) {
  auto c = compute_certificate(2, 1);
  if (c.separation_holds) {
    EXPECT_NO_THROW(certificate(2, 1));
  } else {
    try {
      certificate(2, 1);
      FAIL();
    } catch (const CertificateError& e) {
      EXPECT_NE(std::string(e.what()).find("B1"), std::string::npos);
    }
  }
}

TEST(Ctp, FullTripMatchesDpt) {
  for (auto [n, m] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {4, 2}}) {
    QbfFormula f;
    f.n = n;
    for (int l = 0; l < m; ++l) f.clauses.push_back({l % n + 1});
    auto red = qbf_to_ctp(f);
    auto [cost, end] = route_cost(red.instance, red.instance.source(), red.full_trip);
    EXPECT_EQ(cost, red.cert.D_pt) << n << "," << m;
    EXPECT_EQ(red.instance.vertex_name(end), "r0");
  }
}

TEST(Ctp, UncertainEdgesAreDyadicAndPaddingRecorded) {
  auto red = qbf_to_ctp(make(3, {{1, 2, 3}}));
  EXPECT_TRUE(red.cert.padded);
  EXPECT_EQ(red.formula.n, 4);
  auto p1 = red.cert.p1;
  for (const auto& e : red.instance.edges()) {
    if (!e.uncertain()) continue;
    EXPECT_TRUE(e.block_p == Rational(1, 2) || e.block_p == Rational(3, 4) || e.block_p == p1) << e.id;
  }
  EXPECT_EQ(red.instance.edge_spec(red.instance.edge("default")).cost, Cost(red.cert.h));
  EXPECT_EQ(red.instance.edge_spec(red.instance.edge("exam.shortcut")).cost, Cost(red.cert.L));
}

TEST(Ctp, ObservationTerminalsMergedIntoExam) {
  auto red = qbf_to_ctp(make(2, {{1, 2}}));
  const auto& inst = red.instance;
  EXPECT_FALSE(inst.find_vertex("o1.T1"));
  // r1.5 carries the clause edge, the exam link, and both observation gadgets' v3o / ov4 edges.
  EXPECT_EQ(inst.degree(inst.vertex("r1.5")), 2u + 4u);
}

TEST(Normalize, SeriesParallelAndErrors) {
  Instance inst;
  for (auto n : {"s", "t"}) inst.add_vertex(n);
  inst.add_edge("a", "s", "t", Cost(0), Rational(3, 4));
  inst.add_edge("b", "s", "t", Cost(0), Rational(1, 4));
  inst.add_edge("c", "s", "t", Cost(0), Rational(1, 2));
  inst.add_edge("d", "s", "t", Cost(5));
  inst.set_terminals("s", "t");
  auto out = normalize_half_prob(validate_instance(inst));
  for (const auto& e : out.edges())
    if (e.uncertain()) {
      EXPECT_EQ(e.block_p, Rational(1, 2));
      EXPECT_EQ(e.cost, Cost(0));
    }
  EXPECT_TRUE(out.find_edge("c"));
  EXPECT_TRUE(out.find_edge("a.c2"));
  EXPECT_TRUE(out.find_edge("b.c2"));
  // Open probability of the series chain is 1/4 and the parallel pair is blocked w.p. 1/4.
  Rational a_open(0), b_blocked(0);
  for (const auto& w : weather_support(out)) {
    if (w.status[out.edge("a.c1")] == EdgeStatus::Traversable && w.status[out.edge("a.c2")] == EdgeStatus::Traversable)
      a_open += w.probability;
    if (w.status[out.edge("b.c1")] == EdgeStatus::Blocked && w.status[out.edge("b.c2")] == EdgeStatus::Blocked)
      b_blocked += w.probability;
  }
  EXPECT_EQ(a_open, Rational(1, 4));
  EXPECT_EQ(b_blocked, Rational(1, 4));
  EXPECT_EQ(solve_independent(out).optimal_cost, solve_independent(inst).optimal_cost);

  inst.set_edge_block_p(inst.edge("c"), Rational(1, 3));
  EXPECT_THROW(normalize_half_prob(inst), InstanceError);
}

TEST(Sensing, EpsilonBoundAndCertificate) {
  auto red = vc_to_sensing(VcInstance::triangle(2), Rational(1, 2));
  const auto& c = red.cert;
  // (1-eps)^3 >= 5/6 with integers: (d-k)^3 * 6 >= 5 d^3 for eps = k/d.
  auto num = c.epsilon.numerator(), den = c.epsilon.denominator();
  EXPECT_GE((den - num) * (den - num) * (den - num) * 6, den * den * den * 5);
  auto bigger = Rational(num + 1, den);
  EXPECT_LT((Rational(1) - bigger).pow(3) * Rational(6), Rational(5));
  EXPECT_EQ(c.voi, Rational(1));
  EXPECT_LT(c.g_ub, Rational(0));
  EXPECT_EQ(c.L, Rational(1, 2) - c.epsilon / Rational(4));
  EXPECT_THROW(vc_to_sensing(VcInstance::triangle(1), Rational(1)), std::invalid_argument);
}

TEST(Sensing, GainBoundSignsOnPathGraph) {
  auto c = vc_to_sensing(VcInstance::path3(1), Rational(1, 2)).cert;
  EXPECT_GT(c.g1_lb, Rational(0));
  EXPECT_LT(c.g2_ub, Rational(0));
}

TEST(Sensing, CostBound) {
  auto vc = VcInstance::triangle(1);
  auto c = vc_to_sensing(vc, Rational(1, 2)).cert;
  EXPECT_EQ(sensing_cost_bound(vc, 0, c), Rational(0));
  EXPECT_LE(sensing_cost_bound(vc, 1, c), Rational(2) * c.C);
  EXPECT_GE(sensing_cost_bound(vc, 2, c), Rational(2) * c.C * (Rational(2) - c.alpha));
}

TEST(Sensing, InstanceShape) {
  auto red = vc_to_sensing(VcInstance::path3(1), Rational(1, 2));
  const auto& inst = red.instance;
  EXPECT_EQ(inst.edge_spec(inst.edge("default")).cost, Cost(4));
  EXPECT_TRUE(inst.edge_spec(inst.edge("inf:a")).cost.is_infinite());
  EXPECT_TRUE(inst.edge_spec(inst.edge("u_t")).cost.is_infinite());
  EXPECT_EQ(inst.sensing().lookup(inst.vertex("f:a"), inst.edge("f:a-b")), Cost(0));
  EXPECT_TRUE(inst.sensing().lookup(inst.vertex("f:a"), inst.edge("f:b-c")).is_infinite());
  EXPECT_EQ(inst.sensing().lookup(inst.vertex("u"), inst.edge("x_t")), Cost(0));
  EXPECT_TRUE(VcInstance::path3(1).has_cover_of_size(1));
  EXPECT_FALSE(VcInstance::triangle(1).has_cover_of_size(1));
}
