#pragma once

#include <map>
#include <string>
#include <vector>

#include "aara/lp.hpp"
#include "aara/syntax.hpp"
#include "aara/types.hpp"

namespace aara::analysis {

using VType = BasicTypeRef<lp::Var>;
using VAnn = BasicAnn<lp::Var>;
using VSig = BasicEffectSig<lp::Var>;
using VArrow = BasicArrow<lp::Var>;

/// Per-declaration constraint template: the function's annotated arrow plus
/// the constraints and variables generated while checking its body.
struct Template {
  std::string fun;
  VArrow arrow;
  std::size_t c0 = 0, c1 = 0;  // constraint index range in the shared system
  lp::Var v0 = 0, v1 = 0;      // owned variable range
};

struct ConstraintSet {
  lp::System sys;
  std::map<std::string, Template> templates;
};

/// Labels a computation may perform, after removing those its handlers
/// cover. Throws Error(UnhandledLabelNotDeclared) if a handler's computation
/// performs a label the handler has no branch for.
EffectSet effectSetOf(const CompRef& e, const CoreProgram& p);

/// Throws Error(EffectNotInSignature | LinearContextInHandler | Internal).
ConstraintSet genConstraints(const CoreProgram& p);

/// One step of a path into the argument type.
enum class PathStep { Fst, Snd, Elems, InlPayload, InrPayload };

struct BoundTerm {
  enum class Kind { Length, Inl, Inr } kind = Kind::Length;
  std::vector<PathStep> path;
  std::string name;  // e.g. `|vs|`, `sum|vs[i]|`, `#inl(vs.1)`
  Rat coeff;
};

/// constant + Σ coeff · size.
struct BoundPolynomial {
  Rat constant;
  std::vector<BoundTerm> terms;  // nonzero coefficients only
  std::string pretty() const;    // `1 + 2*|vs| + sum|vs[i]|`
};

/// Measured size of a term in a value (total length of all lists at the
/// path, or the number of injections of the given side).
Rat measure(const BoundTerm& t, const ValueRef& v);
Rat evalBound(const BoundPolynomial& b, const ValueRef& v);

struct LpStats {
  std::size_t vars = 0, constraints = 0, pivots = 0;
};

enum class Status { Bounded, Unsolvable };

struct AnalysisResult {
  std::string entry;
  Status status = Status::Unsolvable;
  Arrow signature;         // concrete, when Bounded
  BoundPolynomial bound;
  LpStats lp;
  double elapsedMs = 0;
  lp::Assignment assignment;  // the entry template's variables
  lp::Objective objective;

  std::string signatureText() const;  // `τ ->[p;p'] τ' / Δ`
};

/// Objective for an entry: list element annotations of the argument weigh
/// 64 per nesting level, sum variants and arrow/effect constants weigh 1.
lp::Objective entryObjective(const Template& t);

AnalysisResult inferBound(const CoreProgram& p, const std::string& entry);
AnalysisResult inferBound(const ConstraintSet& cs, const CoreProgram& p, const std::string& entry);

/// Reads the bound off a concrete argument annotation.
BoundPolynomial boundOf(const Arrow& sig, const std::string& param);

struct CertificateResult {
  bool ok = true;
  std::size_t index = 0;  // violated constraint (== count for a negative var)
  std::string tag;
};

/// Regenerates the constraints of `entry` and checks them under `a`.
CertificateResult checkCertificate(const CoreProgram& p, const std::string& entry,
                                   const lp::Assignment& a);

}  // namespace aara::analysis
