#pragma once

#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "aara/rational.hpp"

namespace aara {

enum class TypeKind { Unit, Void, Int, Prod, Sum, List, Fun, LinFun };

using EffectSet = std::set<std::string>;

// ---------------------------------------------------------------------------
// Structural (annotation-free) types. Used by the elaborator, the machine's
// structural checker and as the skeleton from which annotated types are built.

struct SType;
using STypeRef = std::shared_ptr<const SType>;

struct SType {
  TypeKind kind = TypeKind::Unit;
  STypeRef a, b;       // Prod/Sum components, List element (a), arrow arg/result
  EffectSet effects;   // Fun/LinFun only
};

STypeRef sUnit();
STypeRef sVoid();
STypeRef sInt();
STypeRef sProd(STypeRef l, STypeRef r);
STypeRef sSum(STypeRef l, STypeRef r);
STypeRef sList(STypeRef elem);
STypeRef sFun(STypeRef arg, STypeRef res, EffectSet effects);
STypeRef sLinFun(STypeRef arg, STypeRef res, EffectSet effects);
/// `unit + unit`, the result of comparisons.
STypeRef sBool();

bool sameType(const STypeRef& x, const STypeRef& y);
std::string show(const STypeRef& t);

// ---------------------------------------------------------------------------
// Resource-annotated types, parameterised over what sits in an annotation
// position: a concrete `Rat`, or an LP variable id during inference.

template <class P>
struct BasicType;
template <class P>
using BasicTypeRef = std::shared_ptr<const BasicType<P>>;

/// ⟨τ, q⟩: a type together with constant potential.
template <class P>
struct BasicAnn {
  BasicTypeRef<P> type;
  P pot{};
};

template <class P>
struct EffectEntry {
  std::string label;
  BasicAnn<P> input;
  BasicAnn<P> output;
};

/// Δ: ordered (declaration order) map from labels to annotated contracts.
template <class P>
struct BasicEffectSig {
  std::vector<EffectEntry<P>> entries;

  const EffectEntry<P>* find(const std::string& label) const {
    for (const auto& e : entries)
      if (e.label == label) return &e;
    return nullptr;
  }
  EffectSet labels() const {
    EffectSet s;
    for (const auto& e : entries) s.insert(e.label);
    return s;
  }
};

template <class P>
struct BasicArrow {
  BasicAnn<P> arg;
  BasicAnn<P> result;
  BasicEffectSig<P> effects;
};

template <class P>
struct BasicType {
  TypeKind kind = TypeKind::Unit;
  BasicTypeRef<P> fst, snd;                      // Prod
  std::vector<BasicAnn<P>> anns;                 // Sum: 2 variants, List: element
  std::shared_ptr<const BasicArrow<P>> arrow;    // Fun / LinFun
  std::string templateId;                        // Fun: owning template
};

template <class P>
BasicTypeRef<P> makeBase(TypeKind k) {
  auto t = std::make_shared<BasicType<P>>();
  t->kind = k;
  return t;
}
template <class P>
BasicTypeRef<P> makeProd(BasicTypeRef<P> l, BasicTypeRef<P> r) {
  auto t = std::make_shared<BasicType<P>>();
  t->kind = TypeKind::Prod;
  t->fst = std::move(l);
  t->snd = std::move(r);
  return t;
}
template <class P>
BasicTypeRef<P> makeSum(BasicAnn<P> l, BasicAnn<P> r) {
  auto t = std::make_shared<BasicType<P>>();
  t->kind = TypeKind::Sum;
  t->anns = {std::move(l), std::move(r)};
  return t;
}
template <class P>
BasicTypeRef<P> makeList(BasicAnn<P> elem) {
  auto t = std::make_shared<BasicType<P>>();
  t->kind = TypeKind::List;
  t->anns = {std::move(elem)};
  return t;
}
template <class P>
BasicTypeRef<P> makeArrowType(TypeKind k, BasicArrow<P> arrow, std::string templateId = {}) {
  auto t = std::make_shared<BasicType<P>>();
  t->kind = k;
  t->arrow = std::make_shared<const BasicArrow<P>>(std::move(arrow));
  t->templateId = std::move(templateId);
  return t;
}

/// Rebuilds a type with every annotation passed through `f`.
template <class Q, class P, class F>
BasicTypeRef<Q> mapPots(const BasicTypeRef<P>& t, F&& f);

template <class Q, class P, class F>
BasicAnn<Q> mapPots(const BasicAnn<P>& a, F&& f) {
  return {mapPots<Q>(a.type, f), f(a.pot)};
}

template <class Q, class P, class F>
BasicEffectSig<Q> mapPots(const BasicEffectSig<P>& d, F&& f) {
  BasicEffectSig<Q> out;
  for (const auto& e : d.entries)
    out.entries.push_back({e.label, mapPots<Q>(e.input, f), mapPots<Q>(e.output, f)});
  return out;
}

template <class Q, class P, class F>
BasicArrow<Q> mapPots(const BasicArrow<P>& a, F&& f) {
  return {mapPots<Q>(a.arg, f), mapPots<Q>(a.result, f), mapPots<Q>(a.effects, f)};
}

template <class Q, class P, class F>
BasicTypeRef<Q> mapPots(const BasicTypeRef<P>& t, F&& f) {
  auto out = std::make_shared<BasicType<Q>>();
  out->kind = t->kind;
  out->templateId = t->templateId;
  if (t->fst) out->fst = mapPots<Q>(t->fst, f);
  if (t->snd) out->snd = mapPots<Q>(t->snd, f);
  for (const auto& a : t->anns) out->anns.push_back(mapPots<Q>(a, f));
  if (t->arrow) out->arrow = std::make_shared<const BasicArrow<Q>>(mapPots<Q>(*t->arrow, f));
  return out;
}

/// Drops all annotations.
template <class P>
STypeRef erase(const BasicTypeRef<P>& t) {
  switch (t->kind) {
    case TypeKind::Unit: return sUnit();
    case TypeKind::Void: return sVoid();
    case TypeKind::Int: return sInt();
    case TypeKind::Prod: return sProd(erase(t->fst), erase(t->snd));
    case TypeKind::Sum: return sSum(erase(t->anns[0].type), erase(t->anns[1].type));
    case TypeKind::List: return sList(erase(t->anns[0].type));
    case TypeKind::Fun:
    case TypeKind::LinFun: {
      auto mk = t->kind == TypeKind::Fun ? sFun : sLinFun;
      return mk(erase(t->arrow->arg.type), erase(t->arrow->result.type),
                t->arrow->effects.labels());
    }
  }
  return sUnit();
}

/// Canonical pretty-printer: `L^q(τ)`, `τ1^p + τ2^q`,
/// `τ1 ->[p;p'] τ2 / {ℓ: A =>[q1;q2] B}`, `τ1 -o[p;p'] τ2 / {...}`.
template <class P>
std::string showType(const BasicTypeRef<P>& t, const std::function<std::string(const P&)>& pot,
                     int prec = 0);

template <class P>
std::string showEffects(const BasicEffectSig<P>& d, const std::function<std::string(const P&)>& pot) {
  std::string s = "{";
  bool first = true;
  for (const auto& e : d.entries) {
    if (!first) s += ", ";
    first = false;
    s += e.label + ": " + showType(e.input.type, pot, 1) + " =>[" + pot(e.input.pot) + ";" +
         pot(e.output.pot) + "] " + showType(e.output.type, pot, 1);
  }
  return s + "}";
}

template <class P>
std::string showArrow(const BasicArrow<P>& a, bool linear,
                      const std::function<std::string(const P&)>& pot) {
  std::string s = showType(a.arg.type, pot, 1) + (linear ? " -o[" : " ->[") + pot(a.arg.pot) + ";" +
                  pot(a.result.pot) + "] " + showType(a.result.type, pot, 1);
  if (!a.effects.entries.empty()) s += " / " + showEffects(a.effects, pot);
  return s;
}

// prec: 0 = top, 1 = operand of an arrow, 2 = operand of +, 3 = operand of *
template <class P>
std::string showType(const BasicTypeRef<P>& t, const std::function<std::string(const P&)>& pot,
                     int prec) {
  auto paren = [&](bool need, std::string s) { return need ? "(" + s + ")" : s; };
  switch (t->kind) {
    case TypeKind::Unit: return "unit";
    case TypeKind::Void: return "void";
    case TypeKind::Int: return "int";
    case TypeKind::List:
      return "L^" + pot(t->anns[0].pot) + "(" + showType(t->anns[0].type, pot, 0) + ")";
    case TypeKind::Prod:
      return paren(prec > 2, showType(t->fst, pot, 3) + " * " + showType(t->snd, pot, 3));
    case TypeKind::Sum:
      return paren(prec > 1, showType(t->anns[0].type, pot, 3) + "^" + pot(t->anns[0].pot) +
                                 " + " + showType(t->anns[1].type, pot, 3) + "^" +
                                 pot(t->anns[1].pot));
    case TypeKind::Fun:
    case TypeKind::LinFun:
      return paren(prec > 0, showArrow(*t->arrow, t->kind == TypeKind::LinFun, pot));
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Concrete annotated types.

using Type = BasicType<Rat>;
using TypeRef = BasicTypeRef<Rat>;
using AnnType = BasicAnn<Rat>;
using EffectSig = BasicEffectSig<Rat>;
using Arrow = BasicArrow<Rat>;

std::string show(const TypeRef& t);
std::string show(const AnnType& a);     // `<τ, q>`
std::string show(const Arrow& a, bool linear = false);
std::string show(const EffectSig& d);

bool sameAnnType(const AnnType& x, const AnnType& y);

/// Builds a concrete annotated type from a structural one with every
/// annotation set to `q`.
AnnType annotateUniform(const STypeRef& s, const Rat& q);

}  // namespace aara
