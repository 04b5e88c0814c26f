#pragma once

#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctplab {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// forall x1 exists x2 forall x3 ... phi, phi in CNF with clauses of at most three literals.
/// Literals are DIMACS style: +i is x_i, -i is not x_i, 1 <= i <= n.
struct QbfFormula {
  int n = 0;
  std::vector<std::vector<int>> clauses;

  static bool is_universal(int var) { return var % 2 == 1; }
  int m() const { return static_cast<int>(clauses.size()); }

  void check() const {
    if (n < 1) throw std::invalid_argument("formula needs at least one variable");
    for (const auto& c : clauses) {
      if (c.size() > 3) throw std::invalid_argument("clause exceeds 3 literals");
      for (int lit : c)
        if (lit == 0 || std::abs(lit) > n) throw std::invalid_argument("literal references an undeclared variable");
    }
  }

  /// Clauses containing the literal (+var or -var), 0-based.
  std::vector<int> clauses_with(int literal) const {
    std::vector<int> out;
    for (int l = 0; l < m(); ++l)
      for (int lit : clauses[static_cast<std::size_t>(l)])
        if (lit == literal) {
          out.push_back(l);
          break;
        }
    return out;
  }

  bool contains(int clause, int literal) const {
    for (int lit : clauses.at(static_cast<std::size_t>(clause)))
      if (lit == literal) return true;
    return false;
  }

  std::string to_qdimacs() const {
    std::ostringstream os;
    os << "p cnf " << n << " " << clauses.size() << "\n";
    for (int v = 1; v <= n; ++v) os << (is_universal(v) ? "a " : "e ") << v << " 0\n";
    for (const auto& c : clauses) {
      for (int lit : c) os << lit << " ";
      os << "0\n";
    }
    return os.str();
  }
};

/// Reads the QDIMACS subset: "p cnf n m", one-variable quantifier blocks alternating from "a"
/// over variables 1..n in order, then clauses of at most three literals terminated by 0.
inline QbfFormula parse_qdimacs(std::istream& in) {
  QbfFormula f;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  int declared_clauses = 0;
  int next_var = 1;
  std::vector<int> pending;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream iss(line);
    std::string tok;
    if (!(iss >> tok)) continue;
    if (tok == "c") continue;
    if (tok == "p") {
      std::string fmt;
      if (header) throw ParseError("duplicate header", lineno);
      if (!(iss >> fmt >> f.n >> declared_clauses) || fmt != "cnf" || f.n < 1 || declared_clauses < 0)
        throw ParseError("malformed header, expected 'p cnf n m'", lineno);
      header = true;
      continue;
    }
    if (!header) throw ParseError("missing 'p cnf' header", lineno);
    if (tok == "a" || tok == "e") {
      if (!f.clauses.empty() || !pending.empty()) throw ParseError("quantifier line after clauses", lineno);
      bool universal = tok == "a";
      int var = 0;
      std::vector<int> block;
      while (iss >> var && var != 0) block.push_back(var);
      if (var != 0) throw ParseError("quantifier line not terminated by 0", lineno);
      if (block.size() != 1) throw ParseError("each quantifier block must bind exactly one variable", lineno);
      if (block[0] != next_var) throw ParseError("quantified variables must appear in order 1..n", lineno);
      if (QbfFormula::is_universal(next_var) != universal)
        throw ParseError("quantifiers must alternate starting with 'a'", lineno);
      ++next_var;
      continue;
    }
    iss.clear();
    iss.str(line);
    long long lit = 0;
    bool terminated = false;
    while (iss >> tok) {
      char* end = nullptr;
      lit = std::strtoll(tok.c_str(), &end, 10);
      if (*end != '\0') throw ParseError("unexpected token '" + tok + "'", lineno);
      if (lit == 0) {
        terminated = true;
        if (pending.size() > 3) throw ParseError("clause exceeds 3 literals", lineno);
        f.clauses.push_back(pending);
        pending.clear();
        continue;
      }
      if (std::llabs(lit) > f.n) throw ParseError("literal " + tok + " references an undeclared variable", lineno);
      pending.push_back(static_cast<int>(lit));
    }
    (void)terminated;
  }
  if (!header) throw ParseError("missing 'p cnf' header", 0);
  if (!pending.empty()) throw ParseError("last clause not terminated by 0", lineno);
  if (next_var != f.n + 1) throw ParseError("every variable 1..n must be quantified", lineno);
  if (static_cast<int>(f.clauses.size()) != declared_clauses)
    throw ParseError("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                         std::to_string(f.clauses.size()),
                     lineno);
  return f;
}

inline QbfFormula parse_qdimacs_string(const std::string& text) {
  std::istringstream in(text);
  return parse_qdimacs(in);
}

inline QbfFormula read_qdimacs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse_qdimacs(in);
}

namespace detail {

inline bool cnf_holds(const QbfFormula& f, const std::vector<int>& assignment) {
  for (const auto& c : f.clauses) {
    bool sat = false;
    for (int lit : c) {
      bool val = assignment[static_cast<std::size_t>(std::abs(lit))] != 0;
      if ((lit > 0) == val) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

inline bool qbf_game(const QbfFormula& f, std::vector<int>& assignment, int var) {
  if (var > f.n) return cnf_holds(f, assignment);
  bool universal = QbfFormula::is_universal(var);
  for (int value = 0; value < 2; ++value) {
    assignment[static_cast<std::size_t>(var)] = value;
    bool r = qbf_game(f, assignment, var + 1);
    if (universal && !r) return false;
    if (!universal && r) return true;
  }
  return universal;
}

}  // namespace detail

/// Game-tree evaluation: universal levels AND, existential levels OR, leaves evaluate the CNF.
inline bool qbf_eval(const QbfFormula& f) {
  f.check();
  std::vector<int> assignment(static_cast<std::size_t>(f.n) + 1, 0);
  return detail::qbf_game(f, assignment, 1);
}

/// Winning value for existential `var` given values of x_1..x_{var-1}; nullopt if neither wins.
inline std::optional<bool> qbf_winning_choice(const QbfFormula& f, const std::vector<bool>& prefix, int var) {
  std::vector<int> assignment(static_cast<std::size_t>(f.n) + 1, 0);
  for (int i = 1; i < var; ++i) assignment[static_cast<std::size_t>(i)] = prefix.at(static_cast<std::size_t>(i - 1)) ? 1 : 0;
  for (int value = 1; value >= 0; --value) {
    assignment[static_cast<std::size_t>(var)] = value;
    if (detail::qbf_game(f, assignment, var + 1)) return value == 1;
  }
  return std::nullopt;
}

}  // namespace ctplab
