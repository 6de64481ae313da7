#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aara/rational.hpp"

namespace aara::lp {

/// Annotation variable. Every variable is implicitly constrained to be >= 0.
using Var = int;

/// Σ coeff·var + constant, kept canonical (no zero coefficients).
struct LinExpr {
  std::map<Var, Rat> terms;
  Rat constant;

  LinExpr() = default;
  LinExpr(const Rat& c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  static LinExpr var(Var v, const Rat& coeff = 1);

  LinExpr& add(Var v, const Rat& coeff);
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(const Rat& k);
  bool isConstant() const { return terms.empty(); }
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(const Rat& k, LinExpr a);

enum class Rel { Ge, Eq };

/// Normal form: lhs (>= | =) 0.
struct Constraint {
  LinExpr lhs;
  Rel rel = Rel::Ge;
  std::string tag;  // typing-rule site, for diagnostics
};

/// Minimisation objective; all weights must be positive.
struct Objective {
  std::map<Var, Rat> weights;
  void add(Var v, const Rat& w);
};

using Assignment = std::map<Var, Rat>;

class System {
 public:
  Var newVar(std::string tag);
  const std::string& tag(Var v) const { return tags_.at(static_cast<size_t>(v)); }
  std::size_t numVars() const { return tags_.size(); }

  void addGe(LinExpr e, std::string tag);  // e >= 0
  void addEq(LinExpr e, std::string tag);  // e = 0
  /// a >= b
  void addGe(const LinExpr& a, const LinExpr& b, std::string tag) { addGe(a - b, std::move(tag)); }
  void addEq(const LinExpr& a, const LinExpr& b, std::string tag) { addEq(a - b, std::move(tag)); }

  const std::vector<Constraint>& constraints() const { return constraints_; }

  /// LP-format text (`min: ...; c1: ... >= ...;`) for cross-checking with
  /// external solvers.
  std::string dump(const Objective& obj) const;

 private:
  std::vector<std::string> tags_;
  std::vector<Constraint> constraints_;
};

struct SolveResult {
  enum class Status { Optimal, Infeasible } status = Status::Infeasible;
  Assignment values;  // every variable of the system, when Optimal
  Rat objective;
  std::size_t pivots = 0;
};

/// Exact two-phase primal simplex with Bland's rule. Returns an optimal
/// basic feasible solution. Throws Error(Internal) if the objective turns out
/// unbounded, which cannot happen for positive weights over x >= 0.
SolveResult solve(const System& sys, const Objective& obj);

/// Throws Error(UnboundVar) when the expression mentions an unassigned var.
Rat evalAssignment(const Assignment& a, const LinExpr& e);

/// Index of the first constraint violated under `a` (negative values count
/// as violations of the implicit x >= 0), or nullopt.
std::optional<std::size_t> firstViolated(const System& sys, const Assignment& a);
bool satisfies(const Constraint& c, const Assignment& a);

std::string show(const LinExpr& e);

}  // namespace aara::lp
