#pragma once

#include "ctplab/outcomes.hpp"
#include "ctplab/policy_core.hpp"
#include "ctplab/reductions.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

namespace ctplab {

using nlohmann::json;

inline constexpr const char* kGeneratorVersion = "ctplab 1.0.0";

/// Input could not be read or does not describe a valid object.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("write failed for '" + path + "'");
}

/// FNV-1a, hex.
inline std::string stable_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

// ---- instances -----------------------------------------------------------------------------

inline Variant parse_variant(const std::string& s) {
  if (s == "independent") return Variant::Independent;
  if (s == "dependent") return Variant::Dependent;
  if (s == "sensing") return Variant::Sensing;
  throw InputError("unknown variant '" + s + "'");
}

inline json instance_to_json(const Instance& inst) {
  json j;
  j["variant"] = variant_name(inst.variant());
  j["vertices"] = inst.vertex_names();
  json edges = json::array();
  for (const auto& e : inst.edges())
    edges.push_back({{"id", e.id},
                     {"tail", inst.vertex_name(e.tail)},
                     {"head", inst.vertex_name(e.head)},
                     {"directed", e.directed},
                     {"cost", e.cost.str()},
                     {"block_p", e.block_p.str()}});
  j["edges"] = edges;
  j["s"] = inst.vertex_name(inst.source());
  j["t"] = inst.vertex_name(inst.target());
  if (inst.variant() == Variant::Dependent) {
    const auto& net = inst.dependency();
    json vars = json::array();
    for (const auto& v : net.variables) {
      json jv{{"name", v.name}};
      if (v.edge) jv["edge"] = inst.edge_spec(*v.edge).id;
      json parents = json::array();
      for (auto p : v.parents) parents.push_back(net.variables.at(p).name);
      jv["parents"] = parents;
      json rows = json::array();
      for (const auto& row : v.cpt) rows.push_back({row[0].str(), row[1].str()});
      jv["cpt"] = rows;
      vars.push_back(jv);
    }
    j["dependency"] = {{"max_in_degree", net.max_in_degree}, {"variables", vars}};
  }
  if (!inst.sensing().entries.empty()) {
    json entries = json::array();
    for (const auto& [key, cost] : inst.sensing().entries)
      entries.push_back({{"vertex", inst.vertex_name(key.first)}, {"edge", inst.edge_spec(key.second).id}, {"cost", cost.str()}});
    j["sensing"] = entries;
  }
  return j;
}

inline Instance instance_from_json(const json& j) {
  try {
    Instance inst;
    inst.set_variant(parse_variant(j.at("variant").get<std::string>()));
    for (const auto& v : j.at("vertices")) inst.add_vertex(v.get<std::string>());
    for (const auto& e : j.at("edges"))
      inst.add_edge(e.at("id").get<std::string>(), e.at("tail").get<std::string>(), e.at("head").get<std::string>(),
                    Cost::parse(e.at("cost").get<std::string>()), Rational::parse(e.at("block_p").get<std::string>()),
                    e.value("directed", false));
    inst.set_terminals(j.at("s").get<std::string>(), j.at("t").get<std::string>());
    if (j.contains("dependency")) {
      auto& net = inst.dependency();
      const auto& jd = j.at("dependency");
      net.max_in_degree = jd.value("max_in_degree", net.max_in_degree);
      std::map<std::string, std::size_t> index;
      for (const auto& jv : jd.at("variables")) {
        NetVariable v;
        v.name = jv.at("name").get<std::string>();
        if (jv.contains("edge")) v.edge = inst.edge(jv.at("edge").get<std::string>());
        for (const auto& p : jv.at("parents")) {
          auto it = index.find(p.get<std::string>());
          if (it == index.end()) throw InputError("variable '" + v.name + "' lists parent '" + p.get<std::string>() + "' before it is defined");
          v.parents.push_back(it->second);
        }
        for (const auto& row : jv.at("cpt"))
          v.cpt.push_back({Rational::parse(row.at(0).get<std::string>()), Rational::parse(row.at(1).get<std::string>())});
        if (!index.emplace(v.name, net.variables.size()).second) throw InputError("duplicate variable '" + v.name + "'");
        net.add(std::move(v));
      }
    }
    if (j.contains("sensing"))
      for (const auto& s : j.at("sensing"))
        inst.sensing().entries[{inst.vertex(s.at("vertex").get<std::string>()), inst.edge(s.at("edge").get<std::string>())}] =
            Cost::parse(s.at("cost").get<std::string>());
    return validate_instance(inst);
  } catch (const InstanceError&) {
    throw;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed instance JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("malformed instance JSON: ") + e.what());
  }
}

inline Instance read_instance(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not JSON: " + e.what());
  }
  return instance_from_json(j);
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ---- policies ------------------------------------------------------------------------------

inline json action_to_json(const Instance& inst, const Action& a) {
  switch (a.kind) {
    case Action::Kind::Move: return {{"kind", "move"}, {"edge", inst.edge_spec(a.edge).id}};
    case Action::Kind::Sense: return {{"kind", "sense"}, {"edge", inst.edge_spec(a.edge).id}};
    case Action::Kind::GiveUpToDefault: return {{"kind", "give_up"}, {"edge", inst.edge_spec(a.edge).id}};
    case Action::Kind::Halt: return {{"kind", "halt"}};
  }
  return nullptr;
}

inline Decision action_from_json(const Instance& inst, const json& j) {
  if (j.is_null()) return std::nullopt;
  auto kind = j.at("kind").get<std::string>();
  if (kind == "halt") return Action::halt();
  EdgeId e = inst.edge(j.at("edge").get<std::string>());
  if (kind == "move") return Action::move(e);
  if (kind == "sense") return Action::sense(e);
  if (kind == "give_up") return Action::give_up(e);
  throw InputError("unknown action kind '" + kind + "'");
}

/// Inverse of belief_key.
inline Belief parse_belief_key(const Instance& inst, const std::string& key) {
  auto bar = key.find('|');
  if (bar == std::string::npos) throw InputError("malformed belief key '" + key + "'");
  Belief b = prior_belief(inst);
  b.position = inst.vertex(key.substr(0, bar));
  std::stringstream rest(key.substr(bar + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    auto eq = item.rfind('=');
    if (eq == std::string::npos || eq + 2 != item.size()) throw InputError("malformed belief entry '" + item + "'");
    char c = item[eq + 1];
    if (c != 'T' && c != 'B') throw InputError("malformed belief entry '" + item + "'");
    b.known[inst.edge(item.substr(0, eq))] = c == 'T' ? EdgeStatus::Traversable : EdgeStatus::Blocked;
  }
  return b;
}

inline std::string outcome_label(const Instance& inst, const Outcome& o) {
  std::string s;
  for (const auto& [e, st] : o.statuses) {
    if (!s.empty()) s += ',';
    s += inst.edge_spec(e).id + "=" + status_char(st);
  }
  return s;
}

namespace detail {

inline json tree_node(const Instance& inst, const TreePolicy& tree, const OutcomeModel& model, const Belief& b, std::size_t& budget) {
  if (budget-- == 0) throw CapExceeded("decision tree export", CapExceeded::kUnbounded, kDefaultWeatherCap);
  json node{{"belief", belief_key(inst, b)}};
  auto it = tree.table.find(b);
  if (it == tree.table.end()) throw PolicyError("decision tree has no entry for belief " + belief_key(inst, b));
  const Decision& d = it->second;
  node["action"] = d ? action_to_json(inst, *d) : json(nullptr);
  json children = json::object();
  if (d && d->kind == Action::Kind::Move) {
    Belief moved = b;
    moved.position = inst.edge_spec(d->edge).other(b.position);
    if (moved.position != inst.target())
      for (const auto& o : model.branch(moved, unknown_incident(inst, moved, moved.position)))
        children[outcome_label(inst, o)] = tree_node(inst, tree, model, apply_outcome(moved, o), budget);
  } else if (d && d->kind == Action::Kind::Sense) {
    for (const auto& o : model.branch(b, {d->edge}))
      children[outcome_label(inst, o)] = tree_node(inst, tree, model, apply_outcome(b, o), budget);
  }
  node["children"] = children;
  return node;
}

inline void collect_tree(const Instance& inst, const json& node, TreePolicy& tree) {
  Belief b = parse_belief_key(inst, node.at("belief").get<std::string>());
  tree.table[b] = action_from_json(inst, node.at("action"));
  for (const auto& [label, child] : node.at("children").items()) collect_tree(inst, child, tree);
}

}  // namespace detail

/// Rules serialize as {name, params}; trees as {kind: tree, roots: {observed: node}} with nested
/// nodes {belief, action, children keyed by observed outcome}.
inline json policy_to_json(const Instance& inst, const Policy& p, std::size_t cap = kDefaultWeatherCap) {
  if (const auto* rule = std::get_if<RulePolicy>(&p.repr)) return {{"kind", "rule"}, {"name", rule->name}, {"params", rule->params}};
  const auto& tree = std::get<TreePolicy>(p.repr);
  OutcomeModel model(inst, cap);
  Belief b0 = prior_belief(inst);
  json roots = json::object();
  std::size_t budget = cap;
  for (const auto& o : model.branch(b0, unknown_incident(inst, b0, b0.position)))
    roots[outcome_label(inst, o)] = detail::tree_node(inst, tree, model, apply_outcome(b0, o), budget);
  return {{"kind", "tree"}, {"roots", roots}};
}

inline Policy policy_from_json(const Instance& inst, const json& j) {
  try {
    auto kind = j.value("kind", std::string(j.contains("name") ? "rule" : "tree"));
    if (kind == "rule") return Policy{RulePolicy{j.at("name").get<std::string>(), j.value("params", json::object())}};
    TreePolicy tree;
    for (const auto& [label, node] : j.at("roots").items()) detail::collect_tree(inst, node, tree);
    return Policy{tree};
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed policy JSON: ") + e.what());
  } catch (const InstanceError& e) {
    throw InputError(std::string("policy does not match the instance: ") + e.what());
  }
}

// ---- certificates --------------------------------------------------------------------------

inline json provenance(const std::string& generator, const std::string& hashed, json params) {
  return {{"generator", generator}, {"version", kGeneratorVersion}, {"input_hash", stable_hash(hashed)}, {"params", std::move(params)}};
}

inline json certificate_to_json(const CtpCertificate& c) {
  return {{"n", c.n},
          {"m", c.m},
          {"N", c.N},
          {"N1", c.N1},
          {"L", c.L.str()},
          {"p1", c.p1.str()},
          {"h", c.h.str()},
          {"D_pt", c.D_pt.str()},
          {"D_pt_published", c.D_pt_published.str()},
          {"D_st", c.D_st.str()},
          {"P_r0", c.P_r0.str()},
          {"P_rt", c.P_rt.str()},
          {"B0", c.B0.str()},
          {"B1", c.B1.str()},
          {"q_st", c.q_st.str()},
          {"w_st", c.w_st.str()},
          {"z_st", c.z_st.str()},
          {"separation_holds", c.separation_holds},
          {"padded", c.padded},
          {"vertex_count", c.vertex_count},
          {"edge_count", c.edge_count}};
}

inline json certificate_to_json(const SensingCertificate& c) {
  return {{"epsilon", c.epsilon.str()},   {"epsilon_decimal", c.epsilon.decimal()},
          {"C", c.C.str()},               {"L", c.L.str()},
          {"alpha", c.alpha.str()},       {"k", c.k},
          {"precision", c.precision},     {"g_ub", c.g_ub.str()},
          {"g1_lb", c.g1_lb.str()},       {"g2_ub", c.g2_ub.str()},
          {"voi", c.voi.str()}};
}

inline std::string vc_canonical(const VcInstance& vc) {
  std::string s;
  for (const auto& v : vc.vertices) s += v + ";";
  s += "|";
  for (const auto& [a, b] : vc.edges) s += a + "-" + b + ";";
  return s + "|k=" + std::to_string(vc.k);
}

/// {"vertices": [...], "edges": [[a,b],...], "k": k}; k may be supplied separately.
inline VcInstance vc_from_json(const json& j, std::optional<long long> k) {
  try {
    VcInstance vc;
    vc.vertices = j.at("vertices").get<std::vector<std::string>>();
    for (const auto& e : j.at("edges")) vc.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    if (k) vc.k = *k;
    else if (j.contains("k")) vc.k = j.at("k").get<long long>();
    else throw InputError("cover budget k missing");
    vc.check();
    return vc;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed graph JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

}  // namespace ctplab
