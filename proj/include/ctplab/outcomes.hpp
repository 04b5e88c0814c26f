#pragma once

#include "ctplab/model.hpp"

#include <map>
#include <vector>

namespace ctplab {

/// One joint revelation of a set of edges with its conditional probability.
struct Outcome {
  std::vector<std::pair<EdgeId, EdgeStatus>> statuses;
  Rational probability;
};

inline Belief apply_outcome(Belief b, const Outcome& o) {
  for (const auto& [e, s] : o.statuses) b.known[e] = s;
  return b;
}

/// Conditional distribution of newly revealed edge statuses given a belief. Independent and
/// sensing instances use the product of priors; dependent instances condition the enumerated
/// joint on everything already known.
class OutcomeModel {
 public:
  explicit OutcomeModel(const Instance& inst, std::size_t cap = kDefaultWeatherCap) : inst_(&inst) {
    if (inst.variant() == Variant::Dependent) weathers_ = weather_support(inst, cap);
  }

  const Instance& instance() const { return *inst_; }
  const std::vector<Weather>& weathers() const { return weathers_; }

  /// Outcomes ordered with Traversable before Blocked, lowest edge first.
  std::vector<Outcome> branch(const Belief& b, const std::vector<EdgeId>& revealed) const {
    if (revealed.empty()) return {Outcome{{}, Rational(1)}};
    if (inst_->variant() == Variant::Dependent) return branch_dependent(b, revealed);
    if (revealed.size() >= 30) throw CapExceeded("joint revelation", CapExceeded::kUnbounded, 29);
    std::vector<Outcome> out;
    std::size_t count = std::size_t{1} << revealed.size();
    out.reserve(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
      Outcome o;
      o.probability = Rational(1);
      for (std::size_t i = 0; i < revealed.size(); ++i) {
        const auto& spec = inst_->edge_spec(revealed[i]);
        bool blocked = (mask >> i) & 1U;
        o.statuses.emplace_back(revealed[i], blocked ? EdgeStatus::Blocked : EdgeStatus::Traversable);
        o.probability *= blocked ? spec.block_p : Rational(1) - spec.block_p;
      }
      if (!o.probability.is_zero()) out.push_back(std::move(o));
    }
    return out;
  }

 private:
  std::vector<Outcome> branch_dependent(const Belief& b, const std::vector<EdgeId>& revealed) const {
    std::map<std::vector<EdgeStatus>, Rational> mass;
    Rational total(0);
    for (const auto& w : weathers_) {
      bool consistent = true;
      for (EdgeId e = 0; e < b.known.size(); ++e)
        if (b.known[e] != EdgeStatus::Unknown && b.known[e] != w.status[e]) {
          consistent = false;
          break;
        }
      if (!consistent) continue;
      std::vector<EdgeStatus> key;
      key.reserve(revealed.size());
      for (auto e : revealed) key.push_back(w.status[e]);
      mass[key] += w.probability;
      total += w.probability;
    }
    if (total.is_zero()) throw InstanceError("belief " + belief_key(*inst_, b) + " has probability zero");
    std::vector<Outcome> out;
    for (auto& [key, p] : mass) {
      Outcome o;
      for (std::size_t i = 0; i < revealed.size(); ++i) o.statuses.emplace_back(revealed[i], key[i]);
      o.probability = p / total;
      out.push_back(std::move(o));
    }
    return out;
  }

  const Instance* inst_;
  std::vector<Weather> weathers_;
};

}  // namespace ctplab
