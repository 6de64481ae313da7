#include <sstream>

#include "aara/errors.hpp"
#include "aara/surface.hpp"

namespace aara::surface {

namespace {

int precOf(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binop:
      if (e.op == PrimOp::Lt || e.op == PrimOp::Eq) return 1;
      if (e.op == PrimOp::Mul) return 4;
      return 3;
    case ExprKind::Cons: return 2;
    case ExprKind::App: return 5;
    case ExprKind::Int: return e.num < 0 ? 5 : 7;
    case ExprKind::Inl:
    case ExprKind::Inr: return 6;
    case ExprKind::Var:
    case ExprKind::Unit:
    case ExprKind::Pair:
    case ExprKind::Nil: return 7;
    default: return 0;
  }
}

const char* opText(PrimOp op) {
  switch (op) {
    case PrimOp::Add: return "+";
    case PrimOp::Sub: return "-";
    case PrimOp::Mul: return "*";
    case PrimOp::Lt: return "<";
    case PrimOp::Eq: return "==";
  }
  return "?";
}

void pr(std::ostream& os, const ExprRef& e, int ctx);

void body(std::ostream& os, const ExprRef& e) { pr(os, e, 0); }

void pr(std::ostream& os, const ExprRef& e, int ctx) {
  bool paren = precOf(*e) < ctx;
  if (paren) os << "(";
  switch (e->kind) {
    case ExprKind::Let:
      os << "let " << e->name << " = ";
      body(os, e->a);
      os << " in ";
      body(os, e->b);
      break;
    case ExprKind::Tick: os << "tick " << toString(e->amount); break;
    case ExprKind::Do:
      os << "do " << e->name << " ";
      body(os, e->a);
      break;
    case ExprKind::Raise:
      os << "raise ";
      body(os, e->a);
      break;
    case ExprKind::Absurd:
      os << "absurd ";
      body(os, e->a);
      break;
    case ExprKind::Lam:
      os << "fn " << e->name << " -> ";
      body(os, e->a);
      break;
    case ExprKind::Try:
      os << "try ";
      body(os, e->a);
      os << " catch " << e->name << " -> ";
      body(os, e->b);
      break;
    case ExprKind::Handle:
      os << "handle ";
      body(os, e->a);
      os << " { return " << e->name << " -> ";
      body(os, e->b);
      for (const auto& c : e->clauses) {
        os << " | " << c.label << " " << c.x << " " << c.c << " -> ";
        body(os, c.body);
      }
      for (const auto& l : e->forwards) os << " | forward " << l;
      os << " }";
      break;
    case ExprKind::MatchList:
      os << "match ";
      body(os, e->a);
      os << " { [] -> ";
      body(os, e->b);
      os << " | " << e->x << " :: " << e->y << " -> ";
      body(os, e->c);
      os << " }";
      break;
    case ExprKind::MatchSum:
      os << "match ";
      body(os, e->a);
      os << " { inl " << e->x << " -> ";
      body(os, e->b);
      os << " | inr " << e->y << " -> ";
      body(os, e->c);
      os << " }";
      break;
    case ExprKind::MatchPair:
      os << "match ";
      body(os, e->a);
      os << " { (" << e->x << ", " << e->y << ") -> ";
      body(os, e->b);
      os << " }";
      break;
    case ExprKind::Binop: {
      int p = precOf(*e);
      bool cmp = p == 1;
      pr(os, e->a, cmp ? 2 : p);
      os << " " << opText(e->op) << " ";
      pr(os, e->b, p + 1);
      break;
    }
    case ExprKind::Cons:
      pr(os, e->a, 3);
      os << " :: ";
      pr(os, e->b, 2);
      break;
    case ExprKind::App:
      pr(os, e->a, 5);
      os << " ";
      pr(os, e->b, 7);
      break;
    case ExprKind::Inl:
    case ExprKind::Inr:
      os << (e->kind == ExprKind::Inl ? "inl " : "inr ");
      pr(os, e->a, 7);
      break;
    case ExprKind::Pair:
      os << "(";
      body(os, e->a);
      os << ", ";
      body(os, e->b);
      os << ")";
      break;
    case ExprKind::Unit: os << "()"; break;
    case ExprKind::Nil: os << "[]"; break;
    case ExprKind::Int: os << e->num; break;
    case ExprKind::Var: os << e->name; break;
  }
  if (paren) os << ")";
}

std::string effectsText(const EffectSet& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& l : s) {
    if (!first) out += ", ";
    first = false;
    out += l;
  }
  return out + "}";
}

bool sameOpt(const STypeRef& a, const STypeRef& b) {
  if (!a || !b) return !a && !b;
  return sameType(a, b);
}

}  // namespace

std::string print(const ExprRef& e) {
  std::ostringstream os;
  pr(os, e, 0);
  return os.str();
}

std::string print(const SurfaceProgram& p) {
  std::ostringstream os;
  for (const auto& d : p.effects)
    os << "effect " << d.label << " : " << show(d.input) << " => " << show(d.output) << ";\n";
  for (const auto& f : p.funs) {
    bool arrowResult = f.resultType->kind == TypeKind::Fun || f.resultType->kind == TypeKind::LinFun;
    os << "fun " << f.name << " (" << f.param << " : " << show(f.paramType) << ") : "
       << (arrowResult ? "(" + show(f.resultType) + ")" : show(f.resultType));
    if (!f.effects.empty()) os << " / " << effectsText(f.effects);
    os << " =\n  " << print(f.body) << ";\n";
  }
  if (p.main) os << "main = " << print(p.main) << ";\n";
  return os.str();
}

bool sameExpr(const ExprRef& a, const ExprRef& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->name != b->name || a->x != b->x || a->y != b->y) return false;
  if (a->kind == ExprKind::Tick && a->amount != b->amount) return false;
  if (a->kind == ExprKind::Int && a->num != b->num) return false;
  if (a->kind == ExprKind::Binop && a->op != b->op) return false;
  if (a->forwards != b->forwards || a->clauses.size() != b->clauses.size()) return false;
  for (size_t i = 0; i < a->clauses.size(); ++i) {
    const auto& x = a->clauses[i];
    const auto& y = b->clauses[i];
    if (x.label != y.label || x.x != y.x || x.c != y.c || !sameExpr(x.body, y.body)) return false;
  }
  return sameExpr(a->a, b->a) && sameExpr(a->b, b->b) && sameExpr(a->c, b->c);
}

bool sameProgram(const SurfaceProgram& a, const SurfaceProgram& b) {
  if (a.effects.size() != b.effects.size() || a.funs.size() != b.funs.size()) return false;
  for (size_t i = 0; i < a.effects.size(); ++i) {
    const auto& x = a.effects[i];
    const auto& y = b.effects[i];
    if (x.label != y.label || !sameOpt(x.input, y.input) || !sameOpt(x.output, y.output))
      return false;
  }
  for (size_t i = 0; i < a.funs.size(); ++i) {
    const auto& x = a.funs[i];
    const auto& y = b.funs[i];
    if (x.name != y.name || x.param != y.param || x.effects != y.effects ||
        !sameOpt(x.paramType, y.paramType) || !sameOpt(x.resultType, y.resultType) ||
        !sameExpr(x.body, y.body))
      return false;
  }
  return sameExpr(a.main, b.main);
}

ValueRef literalValue(const ExprRef& e, const STypeRef& type) {
  auto mismatch = [&]() -> ValueRef {
    throw Error(ErrorKind::Type, "literal '" + print(e) + "' does not have type " + show(type),
                e->pos);
  };
  switch (e->kind) {
    case ExprKind::Unit:
      if (type->kind != TypeKind::Unit) return mismatch();
      return vUnit();
    case ExprKind::Int:
      if (type->kind != TypeKind::Int) return mismatch();
      return vInt(e->num);
    case ExprKind::Pair:
      if (type->kind != TypeKind::Prod) return mismatch();
      return vPair(literalValue(e->a, type->a), literalValue(e->b, type->b));
    case ExprKind::Inl:
      if (type->kind != TypeKind::Sum) return mismatch();
      return vInl(literalValue(e->a, type->a), type);
    case ExprKind::Inr:
      if (type->kind != TypeKind::Sum) return mismatch();
      return vInr(literalValue(e->a, type->b), type);
    case ExprKind::Nil:
      if (type->kind != TypeKind::List) return mismatch();
      return vNil(type);
    case ExprKind::Cons:
      if (type->kind != TypeKind::List) return mismatch();
      return vCons(literalValue(e->a, type->a), literalValue(e->b, type));
    default:
      throw Error(ErrorKind::Syntax, "input must be a literal value", e->pos);
  }
}

}  // namespace aara::surface
