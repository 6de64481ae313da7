#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "aara/syntax.hpp"
#include "aara/types.hpp"

namespace aara::surface {

enum class ExprKind {
  Let, Tick, Do, Handle, Raise, Try, MatchList, MatchSum, MatchPair, Absurd, Lam,
  Binop, App, Unit, Pair, Inl, Inr, Nil, Cons, Int, Var
};

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

struct HandlerClause {
  std::string label, x, c;
  ExprRef body;
  SrcPos pos;
};

/// Surface expression. Field use per kind:
///  Let name = a in b | Tick amount | Do name a | Raise a | Try a catch name -> b
///  Handle a { return name -> b | clauses | forward labels }
///  MatchList a { [] -> b | x :: y -> c } | MatchSum a { inl x -> b | inr y -> c }
///  MatchPair a { (x, y) -> b } | Absurd a | Lam name -> a | Binop a op b
///  App a b | Pair a b | Inl a | Inr a | Cons a b | Int num | Var name
struct Expr {
  ExprKind kind = ExprKind::Unit;
  SrcPos pos;
  std::string name, x, y;
  ExprRef a, b, c;
  Rat amount;
  std::int64_t num = 0;
  PrimOp op = PrimOp::Add;
  std::vector<HandlerClause> clauses;
  std::vector<std::string> forwards;
};

struct EffectDecl {
  std::string label;
  STypeRef input, output;
  SrcPos pos;
};

struct FunDecl {
  std::string name, param;
  STypeRef paramType, resultType;
  EffectSet effects;
  ExprRef body;
  SrcPos pos;
};

struct SurfaceProgram {
  std::vector<EffectDecl> effects;
  std::vector<FunDecl> funs;
  ExprRef main;  // may be null
  SrcPos mainPos;
};

/// Label reserved for exceptions (raise/try).
inline const std::string kExcLabel = "Exc";

/// Parses a whole program. Throws Error(Syntax | DuplicateName |
/// UnknownEffectLabel) with source positions.
SurfaceProgram parse(std::string_view text);

/// Parses a single expression (used for input literals on the command line).
ExprRef parseExpr(std::string_view text);

/// Parses a structural type, e.g. `list(int) * list(int)`.
STypeRef parseType(std::string_view text);

/// Source text that parses back to the same AST.
std::string print(const SurfaceProgram& p);
std::string print(const ExprRef& e);

/// AST equality ignoring source positions.
bool sameExpr(const ExprRef& a, const ExprRef& b);
bool sameProgram(const SurfaceProgram& a, const SurfaceProgram& b);

/// Converts a literal expression (unit, ints, pairs, injections, lists) to a
/// closed core value of the given structural type.
ValueRef literalValue(const ExprRef& e, const STypeRef& type);

}  // namespace aara::surface
