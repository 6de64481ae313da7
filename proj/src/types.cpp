#include "aara/types.hpp"

namespace aara {

namespace {

STypeRef mk(TypeKind k, STypeRef a = nullptr, STypeRef b = nullptr, EffectSet effects = {}) {
  auto t = std::make_shared<SType>();
  t->kind = k;
  t->a = std::move(a);
  t->b = std::move(b);
  t->effects = std::move(effects);
  return t;
}

std::string showRat(const Rat& q) { return toString(q); }

}  // namespace

STypeRef sUnit() {
  static const STypeRef t = mk(TypeKind::Unit);
  return t;
}
STypeRef sVoid() {
  static const STypeRef t = mk(TypeKind::Void);
  return t;
}
STypeRef sInt() {
  static const STypeRef t = mk(TypeKind::Int);
  return t;
}
STypeRef sProd(STypeRef l, STypeRef r) { return mk(TypeKind::Prod, std::move(l), std::move(r)); }
STypeRef sSum(STypeRef l, STypeRef r) { return mk(TypeKind::Sum, std::move(l), std::move(r)); }
STypeRef sList(STypeRef elem) { return mk(TypeKind::List, std::move(elem)); }
STypeRef sFun(STypeRef arg, STypeRef res, EffectSet effects) {
  return mk(TypeKind::Fun, std::move(arg), std::move(res), std::move(effects));
}
STypeRef sLinFun(STypeRef arg, STypeRef res, EffectSet effects) {
  return mk(TypeKind::LinFun, std::move(arg), std::move(res), std::move(effects));
}
STypeRef sBool() {
  static const STypeRef t = sSum(sUnit(), sUnit());
  return t;
}

bool sameType(const STypeRef& x, const STypeRef& y) {
  if (x == y) return true;
  if (!x || !y || x->kind != y->kind) return false;
  switch (x->kind) {
    case TypeKind::Unit:
    case TypeKind::Void:
    case TypeKind::Int: return true;
    case TypeKind::List: return sameType(x->a, y->a);
    case TypeKind::Prod:
    case TypeKind::Sum: return sameType(x->a, y->a) && sameType(x->b, y->b);
    case TypeKind::Fun:
    case TypeKind::LinFun:
      return x->effects == y->effects && sameType(x->a, y->a) && sameType(x->b, y->b);
  }
  return false;
}

namespace {

std::string showS(const STypeRef& t, int prec) {
  auto paren = [&](bool need, std::string s) { return need ? "(" + s + ")" : s; };
  auto effs = [](const EffectSet& e) {
    if (e.empty()) return std::string();
    std::string s = " / {";
    bool first = true;
    for (const auto& l : e) {
      if (!first) s += ", ";
      first = false;
      s += l;
    }
    return s + "}";
  };
  switch (t->kind) {
    case TypeKind::Unit: return "unit";
    case TypeKind::Void: return "void";
    case TypeKind::Int: return "int";
    case TypeKind::List: return "list(" + showS(t->a, 0) + ")";
    case TypeKind::Prod: return paren(prec > 2, showS(t->a, 3) + " * " + showS(t->b, 3));
    case TypeKind::Sum: return paren(prec > 1, showS(t->a, 2) + " + " + showS(t->b, 2));
    case TypeKind::Fun:
      return paren(prec > 0, showS(t->a, 1) + " -> " + showS(t->b, 1) + effs(t->effects));
    case TypeKind::LinFun:
      return paren(prec > 0, showS(t->a, 1) + " -o " + showS(t->b, 1) + effs(t->effects));
  }
  return "?";
}

}  // namespace

std::string show(const STypeRef& t) { return showS(t, 0); }

std::string show(const TypeRef& t) { return showType<Rat>(t, showRat); }
std::string show(const AnnType& a) { return "<" + show(a.type) + ", " + toString(a.pot) + ">"; }
std::string show(const Arrow& a, bool linear) { return showArrow<Rat>(a, linear, showRat); }
std::string show(const EffectSig& d) { return showEffects<Rat>(d, showRat); }

namespace {

bool sameT(const TypeRef& x, const TypeRef& y);

bool sameA(const AnnType& x, const AnnType& y) { return x.pot == y.pot && sameT(x.type, y.type); }

bool sameArrow(const Arrow& x, const Arrow& y) {
  if (!sameA(x.arg, y.arg) || !sameA(x.result, y.result)) return false;
  if (x.effects.entries.size() != y.effects.entries.size()) return false;
  for (size_t i = 0; i < x.effects.entries.size(); ++i) {
    const auto& a = x.effects.entries[i];
    const auto& b = y.effects.entries[i];
    if (a.label != b.label || !sameA(a.input, b.input) || !sameA(a.output, b.output)) return false;
  }
  return true;
}

bool sameT(const TypeRef& x, const TypeRef& y) {
  if (x == y) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case TypeKind::Unit:
    case TypeKind::Void:
    case TypeKind::Int: return true;
    case TypeKind::Prod: return sameT(x->fst, y->fst) && sameT(x->snd, y->snd);
    case TypeKind::Sum: return sameA(x->anns[0], y->anns[0]) && sameA(x->anns[1], y->anns[1]);
    case TypeKind::List: return sameA(x->anns[0], y->anns[0]);
    case TypeKind::Fun:
      return x->templateId == y->templateId && sameArrow(*x->arrow, *y->arrow);
    case TypeKind::LinFun: return sameArrow(*x->arrow, *y->arrow);
  }
  return false;
}

TypeRef uniform(const STypeRef& s, const Rat& q) {
  switch (s->kind) {
    case TypeKind::Unit:
    case TypeKind::Void:
    case TypeKind::Int: return makeBase<Rat>(s->kind);
    case TypeKind::Prod: return makeProd<Rat>(uniform(s->a, q), uniform(s->b, q));
    case TypeKind::Sum: return makeSum<Rat>({uniform(s->a, q), q}, {uniform(s->b, q), q});
    case TypeKind::List: return makeList<Rat>({uniform(s->a, q), q});
    case TypeKind::Fun:
    case TypeKind::LinFun: {
      if (!s->effects.empty())
        throw std::invalid_argument("annotateUniform: effectful arrow needs effect declarations");
      Arrow a{{uniform(s->a, q), q}, {uniform(s->b, q), q}, {}};
      return makeArrowType<Rat>(s->kind, std::move(a));
    }
  }
  return makeBase<Rat>(TypeKind::Unit);
}

}  // namespace

bool sameAnnType(const AnnType& x, const AnnType& y) { return sameA(x, y); }

AnnType annotateUniform(const STypeRef& s, const Rat& q) { return {uniform(s, q), q}; }

}  // namespace aara
