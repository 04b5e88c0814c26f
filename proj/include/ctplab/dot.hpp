#pragma once

#include "ctplab/model.hpp"

#include <sstream>
#include <string>

namespace ctplab {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

/// Edge labels "cost|p"; p is the exact fraction when it has at most `max_digits` characters and
/// its decimal rendering otherwise. Uncertain edges are dashed; s is a box, t a double circle.
inline std::string export_dot(const Instance& inst, std::size_t max_digits = 12) {
  auto prob = [&](const Rational& p) {
    if (p.sign() == 0) return std::string("0");
    if (p == Rational(1)) return std::string("1");
    auto exact = p.str();
    return exact.size() <= max_digits ? exact : p.decimal();
  };
  std::ostringstream os;
  bool directed = false;
  for (const auto& e : inst.edges()) directed = directed || e.directed;
  os << (directed ? "digraph" : "graph") << " ctp {\n";
  for (VertexId v = 0; v < inst.vertex_count(); ++v) {
    os << "  " << dot_quote(inst.vertex_name(v));
    if (v == inst.source()) os << " [shape=box]";
    else if (v == inst.target()) os << " [shape=doublecircle]";
    os << ";\n";
  }
  const char* arrow = directed ? " -> " : " -- ";
  for (const auto& e : inst.edges()) {
    std::string cost = e.cost.is_finite() ? (e.cost.value().denominator() == 1 ? e.cost.value().numerator().str() : e.cost.str()) : "inf";
    os << "  " << dot_quote(inst.vertex_name(e.tail)) << arrow << dot_quote(inst.vertex_name(e.head)) << " [label="
       << dot_quote(cost + "|" + prob(e.block_p));
    if (e.uncertain()) os << ", style=dashed";
    if (directed && !e.directed) os << ", dir=both";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace ctplab
