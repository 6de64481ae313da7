#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aara/types.hpp"

namespace aara {

struct SrcPos {
  int line = 0;
  int col = 0;
};

struct Value;
struct Comp;
struct Frame;
using ValueRef = std::shared_ptr<const Value>;
using CompRef = std::shared_ptr<const Comp>;

enum class ValueKind { Var, FunRef, Unit, Int, Pair, Inl, Inr, Nil, Cons, LinLam, DCont };

/// Reified stack segment captured by a handler, applied at most once.
struct ContCell {
  std::vector<Frame> frames;  // bottom (the reinstalled handler) first
  bool used = false;
  STypeRef type;              // LinFun: effect output type -o handler result
};

struct Value {
  ValueKind kind = ValueKind::Unit;
  STypeRef type;          // structural type; for Nil/Inl/Inr the full annotation
  std::string name;       // Var, FunRef, LinLam parameter
  std::int64_t num = 0;   // Int
  ValueRef a, b;          // Pair, Inl/Inr payload (a), Cons head/tail
  CompRef body;           // LinLam
  std::shared_ptr<ContCell> cont;  // DCont
};

enum class CompKind {
  Ret, Let, Tick, App, LinApp, CasePair, CaseVoid, CaseSum, CaseList, Do, Handle, Prim,
  Raise, Try, Share
};

enum class PrimOp { Add, Sub, Mul, Lt, Eq };

struct HandlerBranch {
  std::string label;
  std::string x;  // payload
  std::string c;  // continuation
  CompRef body;
};

/// Fine-grain computation. Field use per kind:
///  Ret v | Let x:xType = e1 in e2 | Tick amount | App v w | LinApp v w
///  CasePair v (x, y) -> e1 | CaseVoid v | CaseSum v (x -> e1 | y -> e2)
///  CaseList v ([] -> e1 | x :: y -> e2) | Do label v | Prim op v w
///  Handle e1 { return y:xType -> e2 | branches } (outer = effects after handling)
///  Raise v | Try e1 catch x -> e2 | Share x as y, z in e1
struct Comp {
  CompKind kind = CompKind::Ret;
  STypeRef type;  // result type
  ValueRef v, w;
  std::string x, y, z;
  STypeRef xType;
  CompRef e1, e2;
  Rat amount;
  std::string label;
  PrimOp op = PrimOp::Add;
  std::vector<HandlerBranch> branches;
  EffectSet outer;
  SrcPos pos;
};

/// K-machine frame: a binder x.e or an installed handler (the Handle node
/// whose handled computation has been pushed).
struct Frame {
  enum class Kind { Bind, Handler } kind = Kind::Bind;
  std::string x;
  STypeRef xType;
  CompRef body;     // Bind: e; Handler: the Handle node itself
};

struct EffectDecl {
  std::string label;
  STypeRef input, output;
  SrcPos pos;
};

struct FunDecl {
  std::string name;
  std::string param;
  STypeRef paramType, resultType;
  EffectSet effects;
  CompRef body;
  SrcPos pos;
};

struct CoreProgram {
  std::vector<EffectDecl> effects;
  std::vector<FunDecl> funs;
  CompRef main;  // may be null

  const FunDecl* findFun(const std::string& name) const;
  const EffectDecl* findEffect(const std::string& label) const;
  /// Declaration index of a label, for canonical ordering.
  int effectIndex(const std::string& label) const;
};

// Constructors -------------------------------------------------------------

ValueRef vVar(std::string name, STypeRef type);
ValueRef vFunRef(std::string name, STypeRef type);
ValueRef vUnit();
ValueRef vInt(std::int64_t n);
ValueRef vPair(ValueRef a, ValueRef b);
ValueRef vInl(ValueRef a, STypeRef sumType);
ValueRef vInr(ValueRef a, STypeRef sumType);
ValueRef vNil(STypeRef listType);
ValueRef vCons(ValueRef h, ValueRef t);
ValueRef vLinLam(std::string x, STypeRef type, CompRef body);
ValueRef vDCont(std::shared_ptr<ContCell> cell);

/// Builds a list value from elements (all of type `elemType`).
ValueRef vList(const std::vector<ValueRef>& elems, const STypeRef& elemType);

CompRef cRet(ValueRef v);
CompRef cLet(std::string x, STypeRef xType, CompRef e1, CompRef e2);
CompRef cTick(Rat q);
CompRef cApp(ValueRef f, ValueRef arg, STypeRef resultType);
CompRef cLinApp(ValueRef f, ValueRef arg, STypeRef resultType);
CompRef cDo(std::string label, ValueRef payload, STypeRef resultType);

/// Shallow copy for rewriting passes.
std::shared_ptr<Comp> clone(const Comp& c);

// Utilities ------------------------------------------------------------------

/// Simultaneous substitution of closed values (or fresh variables) for
/// variables. Stops at binders that shadow a substituted name.
CompRef subst(const CompRef& e, const std::map<std::string, ValueRef>& s);
ValueRef subst(const ValueRef& v, const std::map<std::string, ValueRef>& s);

std::set<std::string> freeVars(const CompRef& e);
std::set<std::string> freeVars(const ValueRef& v);

std::string show(const ValueRef& v);
std::string show(const CompRef& e, int indent = 0);
std::string show(const CoreProgram& p);

/// Structural equality of closed values (dcont compared by identity).
bool sameValue(const ValueRef& a, const ValueRef& b);

}  // namespace aara
