#include "ctplab/gadgets.hpp"
#include "ctplab/model.hpp"
#include "ctplab/reductions.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace ctplab;

namespace {

Instance sure_edge() {
  Instance inst;
  inst.add_vertex("s");
  inst.add_vertex("t");
  inst.add_edge("st", "s", "t", Cost(5));
  inst.set_terminals("s", "t");
  return inst;
}

std::string error_of(const Instance& inst) {
  try {
    validate_instance(inst);
  } catch (const InstanceError& e) {
    return e.what();
  }
  return "";
}

Rational total(const std::vector<Weather>& ws) {
  Rational acc(0);
  for (const auto& w : ws) acc += w.probability;
  return acc;
}

}  // namespace

TEST(Validate, MinimalInstance) { EXPECT_NO_THROW(validate_instance(sure_edge())); }

TEST(Validate, ProbabilityOutOfRange) {
  auto inst = sure_edge();
  inst.set_edge_block_p(0, Rational(3, 2));
  EXPECT_NE(error_of(inst).find("probability out of range"), std::string::npos);
}

TEST(Validate, CptRowNotNormalized) {
  Instance inst;
  inst.set_variant(Variant::Dependent);
  inst.add_vertex("s");
  inst.add_vertex("t");
  auto e = inst.add_edge("st", "s", "t", Cost(1), Rational(1, 2));
  inst.add_edge("fallback", "s", "t", Cost(2));
  inst.dependency().add({"st", e, {}, {{Rational(1, 2), Rational(3, 8)}}});
  inst.set_terminals("s", "t");
  EXPECT_NE(error_of(inst).find("CPT row not normalized"), std::string::npos);
}

TEST(Validate, OtherInvariants) {
  Instance loop;
  loop.add_vertex("s");
  loop.add_vertex("t");
  loop.add_edge("l", "s", "s", Cost(1));
  loop.add_edge("st", "s", "t", Cost(1));
  loop.set_terminals("s", "t");
  EXPECT_NE(error_of(loop).find("self-loop"), std::string::npos);

  Instance same;
  same.add_vertex("s");
  same.set_terminals("s", "s");
  EXPECT_NE(error_of(same).find("source equals target"), std::string::npos);

  Instance cyc;
  cyc.set_variant(Variant::Dependent);
  cyc.add_vertex("s");
  cyc.add_vertex("t");
  auto e = cyc.add_edge("st", "s", "t", Cost(1), Rational(1, 2));
  cyc.dependency().add({"a", e, {1}, {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}}});
  cyc.dependency().add({"b", std::nullopt, {0}, {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}}});
  cyc.set_terminals("s", "t");
  EXPECT_FALSE(error_of(cyc).empty());

  Instance cut;
  cut.add_vertex("s");
  cut.add_vertex("t");
  cut.add_edge("st", "s", "t", Cost::infinite());
  cut.set_terminals("s", "t");
  EXPECT_NE(error_of(cut).find("unreachable"), std::string::npos);
}

TEST(Weather, SingleCoin) {
  auto inst = sure_edge();
  inst.set_edge_block_p(0, Rational(1, 2));
  inst.add_edge("fallback", "s", "t", Cost(9));
  auto ws = weather_support(inst);
  ASSERT_EQ(ws.size(), 2u);
  EXPECT_EQ(ws[0].probability, Rational(1, 2));
  EXPECT_EQ(ws[1].probability, Rational(1, 2));
}

TEST(Weather, ProductForm) {
  Instance inst;
  inst.add_vertex("s");
  inst.add_vertex("t");
  inst.add_edge("a", "s", "t", Cost(1), Rational(1, 2));
  inst.add_edge("b", "s", "t", Cost(1), Rational(3, 4));
  inst.set_terminals("s", "t");
  auto ws = weather_support(inst);
  std::vector<Rational> ps;
  for (const auto& w : ws) ps.push_back(w.probability);
  std::sort(ps.begin(), ps.end());
  std::vector<Rational> want{Rational(1, 8), Rational(1, 8), Rational(3, 8), Rational(3, 8)};
  EXPECT_EQ(ps, want);
  EXPECT_EQ(total(ws), Rational(1));
}

TEST(Weather, CapReportsCounts) {
  Instance inst;
  inst.add_vertex("s");
  inst.add_vertex("t");
  for (int i = 0; i < 12; ++i) inst.add_edge("c" + std::to_string(i), "s", "t", Cost(0), Rational(1, 2));
  inst.add_edge("fallback", "s", "t", Cost(1));
  inst.set_terminals("s", "t");
  try {
    weather_support(inst, 1000);
    FAIL();
  } catch (const CapExceeded& e) {
    EXPECT_EQ(e.required(), 4096u);
    EXPECT_EQ(e.allowed(), 1000u);
  }
}

TEST(Weather, DependentUniversalPairIsExclusive) {
  QbfFormula f;
  f.n = 2;
  f.clauses = {{1, 2}};
  auto red = qbf_to_ctpdep(f);
  const auto& inst = red.instance;
  auto ws = weather_support(inst);
  EXPECT_EQ(total(ws), Rational(1));
  EdgeId xt = inst.edge("x1.T"), xf = inst.edge("x1.F");
  EdgeId odd = inst.edge("choice_odd"), even = inst.edge("choice_even");
  std::map<std::pair<EdgeStatus, EdgeStatus>, Rational> pair;
  for (const auto& w : ws) {
    pair[{w.status[xt], w.status[xf]}] += w.probability;
    EXPECT_NE(w.status[odd], w.status[even]);
  }
  ASSERT_EQ(pair.size(), 2u);
  for (const auto& [k, p] : pair) {
    EXPECT_NE(k.first, k.second);
    EXPECT_EQ(p, Rational(1, 2));
  }
}

TEST(Weather, DependentParityMatchesClauseCoins) {
  QbfFormula f;
  f.n = 2;
  f.clauses = {{1, 2}, {-1, 2}, {-2}};
  const auto inst = qbf_to_ctpdep(f).instance;
  // The observation edges of clause l copy its coin; the odd choice edge is open iff an odd
  // number of clause coins is open.
  auto check = [&](const Weather& w) {
    int open = 0;
    for (int l = 1; l <= 3; ++l) {
      std::optional<EdgeStatus> st;
      for (const auto& e : inst.edges()) {
        auto suffix = std::string(".") + "T" + std::to_string(l);
        auto suffix_f = std::string(".") + "F" + std::to_string(l);
        bool in = e.id.rfind("obs", 0) == 0 && (e.id.size() >= suffix.size() &&
                                                (e.id.compare(e.id.size() - suffix.size(), suffix.size(), suffix) == 0 ||
                                                 e.id.compare(e.id.size() - suffix_f.size(), suffix_f.size(), suffix_f) == 0));
        if (!in) continue;
        auto s = w.status[inst.edge(e.id)];
        if (st) {
          EXPECT_EQ(*st, s);
        }
        st = s;
      }
      ASSERT_TRUE(st.has_value());
      if (*st == EdgeStatus::Traversable) ++open;
    }
    EXPECT_EQ(w.status[inst.edge("choice_odd")] == EdgeStatus::Traversable, open % 2 == 1);
  };
  for (const auto& w : weather_support(inst)) check(w);
  for (std::uint64_t seed = 0; seed < 200; ++seed) check(sample_weather(inst, seed));
}

TEST(Sampling, DeterministicAndUnbiased) {
  auto inst = sure_edge();
  inst.set_edge_block_p(0, Rational(1, 2));
  inst.add_edge("fallback", "s", "t", Cost(9));
  EXPECT_EQ(sample_weather(inst, 42).status, sample_weather(inst, 42).status);
  std::mt19937_64 rng(3);
  const int n = 1000000;
  int blocked = 0;
  for (int i = 0; i < n; ++i) blocked += sample_weather(inst, rng).status[0] == EdgeStatus::Blocked;
  double sigma = std::sqrt(n * 0.25);
  EXPECT_LT(std::abs(blocked - n / 2.0), 4 * sigma);
}

TEST(Sampling, FrequenciesMatchSupport) {
  Instance inst;
  inst.add_vertex("s");
  inst.add_vertex("t");
  inst.add_edge("a", "s", "t", Cost(1), Rational(1, 4));
  inst.add_edge("b", "s", "t", Cost(1), Rational(7, 8));
  inst.add_edge("fallback", "s", "t", Cost(3));
  inst.set_terminals("s", "t");
  auto ws = weather_support(inst);
  std::map<std::vector<EdgeStatus>, int> hits;
  std::mt19937_64 rng(11);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++hits[sample_weather(inst, rng).status];
  for (const auto& w : ws) {
    double p = std::stod(w.probability.decimal());
    double sigma = std::sqrt(n * p * (1 - p));
    EXPECT_LT(std::abs(hits[w.status] - n * p), 4 * sigma);
  }
}

TEST(Observe, IncidenceOnlyOnBaitingGadget) {
  auto inst = build_baiting_harness(Rational(2), Rational(2));
  auto w = sample_weather(inst, 5);
  auto b = observe(inst, prior_belief(inst), w, inst.source());
  EXPECT_EQ(b.known[inst.edge("bg.s1")], EdgeStatus::Unknown);
  EXPECT_EQ(b.known[inst.edge("bg.p0")], EdgeStatus::Traversable);
  b.position = inst.vertex("bg.v1");
  auto b2 = observe(inst, b, w, b.position);
  EXPECT_EQ(b2.known[inst.edge("bg.s1")], w.status[inst.edge("bg.s1")]);
  EXPECT_EQ(observe(inst, b2, w, b2.position), b2);
  EXPECT_THROW(observe(inst, b2, w, inst.source()), InstanceError);
}

TEST(Observe, ObservationGadgetEntryRevealsClosingEdge) {
  auto inst = build_observation_harness(Rational(24));
  auto w = sample_weather(inst, 9);
  Belief b = prior_belief(inst);
  b.position = inst.vertex("og.v1");
  b = observe(inst, b, w, b.position);
  EXPECT_NE(b.known[inst.edge("og.v4v1")], EdgeStatus::Unknown);
}

TEST(Observe, MonotoneUnderRandomWalks) {
  auto inst = build_baiting_harness(Rational(3, 2), Rational(3, 2));
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto w = sample_weather(inst, rng);
    Belief b = observe(inst, prior_belief(inst), w, inst.source());
    for (int step = 0; step < 20; ++step) {
      auto inc = inst.incident(b.position);
      auto e = inc[std::uniform_int_distribution<std::size_t>(0, inc.size() - 1)(rng)];
      if (w.status[e] != EdgeStatus::Traversable) continue;
      Belief next = b;
      next.position = inst.edge_spec(e).other(b.position);
      next = observe(inst, next, w, next.position);
      for (EdgeId k = 0; k < b.known.size(); ++k)
        if (b.known[k] != EdgeStatus::Unknown) {
          EXPECT_EQ(next.known[k], b.known[k]);
        }
      b = next;
    }
  }
}

TEST(Merge, DropsJoiningEdge) {
  Instance inst;
  for (auto n : {"s", "a", "b", "t"}) inst.add_vertex(n);
  inst.add_edge("sa", "s", "a", Cost(1));
  inst.add_edge("ab", "a", "b", Cost(0));
  inst.add_edge("bt", "b", "t", Cost(1));
  inst.set_terminals("s", "t");
  auto merged = merge_vertices(inst, "a", "b");
  EXPECT_EQ(merged.vertex_count(), 3u);
  EXPECT_EQ(merged.edge_count(), 2u);
  EXPECT_FALSE(merged.find_edge("ab"));
  EXPECT_EQ(merged.degree(merged.vertex("a")), 2u);
}

TEST(Merge, DegreesAddAndSourceTargetForbidden) {
  Instance inst;
  for (auto n : {"s", "a", "b", "c", "t"}) inst.add_vertex(n);
  inst.add_edge("sa", "s", "a", Cost(1));
  inst.add_edge("at", "a", "t", Cost(1));
  inst.add_edge("sb", "s", "b", Cost(1));
  inst.add_edge("bc", "b", "c", Cost(1));
  inst.add_edge("ct", "c", "t", Cost(1));
  inst.set_terminals("s", "t");
  auto merged = merge_vertices(inst, "a", "c");
  EXPECT_EQ(merged.degree(merged.vertex("a")), 4u);
  EXPECT_THROW(merge_vertices(inst, "s", "t"), InstanceError);
  Instance loop;
  for (auto n : {"s", "a", "b", "t"}) loop.add_vertex(n);
  loop.add_edge("sa", "s", "a", Cost(1));
  loop.add_edge("ab", "a", "b", Cost(2));
  loop.add_edge("bt", "b", "t", Cost(1));
  loop.set_terminals("s", "t");
  EXPECT_THROW(merge_vertices(loop, "a", "b"), InstanceError);
}

TEST(BeliefKey, ListsRevealedUncertainEdges) {
  auto inst = build_baiting_harness(Rational(2), Rational(2));
  Belief b = prior_belief(inst);
  EXPECT_EQ(belief_key(inst, b), "u|");
  b.known[inst.edge("bg.s3")] = EdgeStatus::Blocked;
  EXPECT_EQ(belief_key(inst, b), "u|bg.s3=B");
}
