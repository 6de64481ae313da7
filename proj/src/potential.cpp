#include "aara/potential.hpp"

#include "aara/errors.hpp"

namespace aara {

namespace {

[[noreturn]] void mismatch(const ValueRef& v, const TypeRef& t) {
  throw Error(ErrorKind::StructuralMismatch, "value " + show(v) + " does not inhabit " + show(t));
}

}  // namespace

Rat potential(const ValueRef& v, const TypeRef& t) {
  switch (t->kind) {
    case TypeKind::Unit:
      if (v->kind != ValueKind::Unit) mismatch(v, t);
      return 0;
    case TypeKind::Int:
      if (v->kind != ValueKind::Int) mismatch(v, t);
      return 0;
    case TypeKind::Void: mismatch(v, t);
    case TypeKind::Prod:
      if (v->kind != ValueKind::Pair) mismatch(v, t);
      return potential(v->a, t->fst) + potential(v->b, t->snd);
    case TypeKind::Sum:
      if (v->kind == ValueKind::Inl) return t->anns[0].pot + potential(v->a, t->anns[0].type);
      if (v->kind == ValueKind::Inr) return t->anns[1].pot + potential(v->a, t->anns[1].type);
      mismatch(v, t);
    case TypeKind::List: {
      Rat sum = 0;
      const AnnType& elem = t->anns[0];
      ValueRef p = v;
      for (; p->kind == ValueKind::Cons; p = p->b) sum += elem.pot + potential(p->a, elem.type);
      if (p->kind != ValueKind::Nil) mismatch(v, t);
      return sum;
    }
    case TypeKind::Fun:
      if (v->kind != ValueKind::FunRef) mismatch(v, t);
      return 0;
    case TypeKind::LinFun:
      if (v->kind != ValueKind::LinLam && v->kind != ValueKind::DCont) mismatch(v, t);
      return 0;
  }
  mismatch(v, t);
}

TypeRef zero(const TypeRef& t) {
  switch (t->kind) {
    case TypeKind::Unit:
    case TypeKind::Void:
    case TypeKind::Int:
    case TypeKind::Fun: return t;
    case TypeKind::LinFun:
      throw Error(ErrorKind::LinearInZero, "zeroing is undefined on linear function type " + show(t));
    case TypeKind::Prod: return makeProd<Rat>(zero(t->fst), zero(t->snd));
    case TypeKind::Sum: return makeSum<Rat>(zero(t->anns[0]), zero(t->anns[1]));
    case TypeKind::List: return makeList<Rat>(zero(t->anns[0]));
  }
  return t;
}

AnnType zero(const AnnType& a) { return {zero(a.type), 0}; }

bool isPotentialFree(const TypeRef& t) {
  try {
    return sameAnnType({zero(t), 0}, {t, 0});
  } catch (const Error&) {
    return false;
  }
}

bool isPotentialFree(const AnnType& a) { return a.pot == 0 && isPotentialFree(a.type); }

}  // namespace aara
