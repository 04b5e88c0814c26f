#pragma once

#include "ctplab/model.hpp"

#include <random>
#include <string>

namespace ctplab {

struct ToyOptions {
  int vertices = 5;
  int extra_edges = 4;
  int max_uncertain = 6;
  int max_cost = 4;
  /// Uncertain edges get zero cost (the shape normalization preserves exactly).
  bool zero_cost_uncertain = true;
  /// Blocking probabilities drawn from this dyadic menu.
  std::vector<Rational> menu = {Rational(1, 2), Rational(1, 4), Rational(3, 4), Rational(7, 8), Rational(1, 8)};
};

/// Connected undirected independent toy: a random spanning tree plus extra edges, and a sure
/// fallback edge (s,t) so the optimum is finite.
inline Instance random_toy_instance(std::mt19937_64& rng, const ToyOptions& opt = {}) {
  Instance inst;
  int n = std::max(opt.vertices, 2);
  for (int i = 0; i < n; ++i) inst.add_vertex("n" + std::to_string(i));
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int uncertain = 0, next_id = 0;
  auto add = [&](int a, int b) {
    bool unc = uncertain < opt.max_uncertain && pick(0, 2) > 0;
    Rational p(0);
    Cost c(pick(1, opt.max_cost));
    if (unc) {
      ++uncertain;
      p = opt.menu[static_cast<std::size_t>(pick(0, static_cast<int>(opt.menu.size()) - 1))];
      if (opt.zero_cost_uncertain) c = Cost(0);
      else c = Cost(pick(0, opt.max_cost));
    }
    inst.add_edge("e" + std::to_string(next_id++), "n" + std::to_string(a), "n" + std::to_string(b), c, p);
  };
  for (int i = 1; i < n; ++i) add(pick(0, i - 1), i);
  for (int k = 0; k < opt.extra_edges; ++k) {
    int a = pick(0, n - 1), b = pick(0, n - 1);
    if (a != b) add(a, b);
  }
  inst.add_edge("fallback", "n0", "n" + std::to_string(n - 1), Cost(pick(6, 12)));
  inst.set_terminals("n0", "n" + std::to_string(n - 1));
  return validate_instance(inst);
}

/// Up to `max_paths` internally disjoint s-t paths of at most `max_len` edges each.
inline Instance random_disjoint_instance(std::mt19937_64& rng, int max_paths = 4, int max_len = 3) {
  Instance inst;
  inst.add_vertex("s");
  inst.add_vertex("t");
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const Rational menu[] = {Rational(0), Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4)};
  int paths = pick(1, max_paths);
  bool has_sure = false;
  for (int p = 0; p < paths; ++p) {
    int len = pick(1, max_len);
    std::string at = "s";
    for (int k = 0; k < len; ++k) {
      std::string next = k + 1 == len ? "t" : "a" + std::to_string(p) + "." + std::to_string(k + 1);
      if (next != "t") inst.add_vertex(next);
      Rational bp = menu[pick(0, 4)];
      if (p == paths - 1 && !has_sure) bp = Rational(0);
      inst.add_edge("p" + std::to_string(p) + "." + std::to_string(k), at, next, Cost(pick(0, 5)), bp);
      at = next;
    }
    bool sure = true;
    for (const auto& e : inst.edges())
      if (e.id.rfind("p" + std::to_string(p) + ".", 0) == 0 && e.block_p.sign() != 0) sure = false;
    has_sure = has_sure || sure;
  }
  inst.set_terminals("s", "t");
  return validate_instance(inst);
}

}  // namespace ctplab
