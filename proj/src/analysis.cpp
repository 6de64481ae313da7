#include "aara/analysis.hpp"

#include <algorithm>

#include "aara/errors.hpp"

namespace aara::analysis {

using lp::LinExpr;
using lp::Var;

// Effect sets ---------------------------------------------------------------

namespace {

void effectsV(const ValueRef& v, const CoreProgram& p, EffectSet& out);

void effectsC(const CompRef& e, const CoreProgram& p, EffectSet& out) {
  if (!e) return;
  switch (e->kind) {
    case CompKind::Do: out.insert(e->label); return;
    case CompKind::App:
    case CompKind::LinApp:
      if (e->v->type) out.insert(e->v->type->effects.begin(), e->v->type->effects.end());
      break;
    case CompKind::Handle: {
      EffectSet inner;
      effectsC(e->e1, p, inner);
      EffectSet covered;
      for (const auto& b : e->branches) covered.insert(b.label);
      for (const auto& l : inner)
        if (!covered.count(l))
          throw Error(ErrorKind::UnhandledLabelNotDeclared,
                      "handler has no branch for '" + l + "', which its computation may perform",
                      e->pos);
      effectsC(e->e2, p, out);
      for (const auto& b : e->branches) effectsC(b.body, p, out);
      return;
    }
    default: break;
  }
  effectsV(e->v, p, out);
  effectsV(e->w, p, out);
  effectsC(e->e1, p, out);
  effectsC(e->e2, p, out);
}

// Lambda bodies are checked for their own handlers, but creating a lambda
// performs nothing.
void effectsV(const ValueRef& v, const CoreProgram& p, EffectSet& out) {
  if (!v) return;
  if (v->kind == ValueKind::LinLam) {
    EffectSet ignored;
    effectsC(v->body, p, ignored);
    return;
  }
  if (v->a) effectsV(v->a, p, out);
  if (v->b) effectsV(v->b, p, out);
}

}  // namespace

EffectSet effectSetOf(const CompRef& e, const CoreProgram& p) {
  EffectSet out;
  effectsC(e, p, out);
  return out;
}

// Constraint generation -----------------------------------------------------

namespace {

LinExpr V(Var v) { return LinExpr::var(v); }

using Env = std::map<std::string, VType>;

std::string posTag(const Comp& e) {
  if (e.pos.line == 0) return "";
  return "@" + std::to_string(e.pos.line) + ":" + std::to_string(e.pos.col);
}

class Gen {
 public:
  Gen(const CoreProgram& p, ConstraintSet& cs) : p_(p), cs_(cs) {}

  void function(const FunDecl& f) {
    Template t;
    t.fun = f.name;
    t.v0 = static_cast<Var>(sys().numVars());
    t.c0 = sys().constraints().size();
    t.arrow = arrow(sFun(f.paramType, f.resultType, f.effects), f.name);
    fun_ = f.name;
    own_ = &t.arrow;

    EffectSet eff = effectSetOf(f.body, p_);
    for (const auto& l : eff)
      if (!f.effects.count(l))
        throw Error(ErrorKind::EffectNotInSignature,
                    "'" + f.name + "' may perform '" + l + "', which its signature does not declare",
                    f.pos);

    LinExpr q = check(f.body, {{f.param, t.arrow.arg.type}}, t.arrow.result.type,
                      V(t.arrow.result.pot), t.arrow.effects);
    ge(V(t.arrow.arg.pot), q, "T-Fun");
    t.v1 = static_cast<Var>(sys().numVars());
    t.c1 = sys().constraints().size();
    own_ = nullptr;
    cs_.templates[f.name] = std::move(t);
  }

 private:
  const CoreProgram& p_;
  ConstraintSet& cs_;
  std::string fun_;
  const VArrow* own_ = nullptr;

  lp::System& sys() { return cs_.sys; }
  Var fresh(const std::string& tag) { return sys().newVar(fun_ + "." + tag); }

  void ge(const LinExpr& a, const LinExpr& b, const std::string& rule) {
    sys().addGe(a, b, fun_ + ":" + rule);
  }
  void eq(const LinExpr& a, const LinExpr& b, const std::string& rule) {
    sys().addEq(a, b, fun_ + ":" + rule);
  }

  // Skeletons with fresh annotation variables.

  VType skel(const STypeRef& s, const std::string& tag) {
    switch (s->kind) {
      case TypeKind::Unit:
      case TypeKind::Void:
      case TypeKind::Int: return makeBase<Var>(s->kind);
      case TypeKind::Prod: return makeProd<Var>(skel(s->a, tag + ".1"), skel(s->b, tag + ".2"));
      case TypeKind::Sum: return makeSum<Var>(ann(s->a, tag + ".inl"), ann(s->b, tag + ".inr"));
      case TypeKind::List: return makeList<Var>(ann(s->a, tag + "[]"));
      case TypeKind::Fun:
      case TypeKind::LinFun: return makeArrowType<Var>(s->kind, arrow(s, tag));
    }
    return makeBase<Var>(TypeKind::Unit);
  }

  VAnn ann(const STypeRef& s, const std::string& tag) {
    Var pot = fresh(tag);
    return {skel(s, tag), pot};
  }

  VSig sig(const EffectSet& labels, const std::string& tag) {
    VSig d;
    for (const auto& decl : p_.effects) {
      if (!labels.count(decl.label)) continue;
      d.entries.push_back({decl.label, ann(decl.input, tag + "." + decl.label + ".in"),
                           ann(decl.output, tag + "." + decl.label + ".out")});
    }
    return d;
  }

  VArrow arrow(const STypeRef& s, const std::string& tag) {
    VArrow a;
    a.arg = ann(s->a, tag + ".arg");
    a.result = ann(s->b, tag + ".res");
    a.effects = sig(s->effects, tag);
    return a;
  }

  // Relations between annotated types.

  void sub(const VType& a, const VType& b, const std::string& rule) {
    if (a->kind != b->kind) throw Error(ErrorKind::Internal, "shape mismatch in " + rule);
    switch (a->kind) {
      case TypeKind::Prod:
        sub(a->fst, b->fst, rule);
        sub(a->snd, b->snd, rule);
        break;
      case TypeKind::Sum:
      case TypeKind::List:
        for (size_t i = 0; i < a->anns.size(); ++i) {
          ge(V(a->anns[i].pot), V(b->anns[i].pot), rule);
          sub(a->anns[i].type, b->anns[i].type, rule);
        }
        break;
      case TypeKind::Fun:
      case TypeKind::LinFun: eqArrow(*a->arrow, *b->arrow, rule); break;
      default: break;
    }
  }

  void eqType(const VType& a, const VType& b, const std::string& rule) {
    if (a->kind != b->kind) throw Error(ErrorKind::Internal, "shape mismatch in " + rule);
    switch (a->kind) {
      case TypeKind::Prod:
        eqType(a->fst, b->fst, rule);
        eqType(a->snd, b->snd, rule);
        break;
      case TypeKind::Sum:
      case TypeKind::List:
        for (size_t i = 0; i < a->anns.size(); ++i) eqAnn(a->anns[i], b->anns[i], rule);
        break;
      case TypeKind::Fun:
      case TypeKind::LinFun: eqArrow(*a->arrow, *b->arrow, rule); break;
      default: break;
    }
  }

  void eqAnn(const VAnn& a, const VAnn& b, const std::string& rule) {
    if (a.pot != b.pot) eq(V(a.pot), V(b.pot), rule);
    eqType(a.type, b.type, rule);
  }

  void eqArrow(const VArrow& a, const VArrow& b, const std::string& rule) {
    if (&a == &b) return;
    eqAnn(a.arg, b.arg, rule);
    eqAnn(a.result, b.result, rule);
    if (a.effects.labels() != b.effects.labels())
      throw Error(ErrorKind::Internal, "effect rows differ in " + rule);
    eqSig(a.effects, b.effects, rule);
  }

  // Every entry of `callee` is tied to the ambient entry with the same label.
  void eqSig(const VSig& callee, const VSig& ambient, const std::string& rule) {
    for (const auto& e : callee.entries) {
      const auto* amb = ambient.find(e.label);
      if (!amb)
        throw Error(ErrorKind::EffectNotInSignature,
                    "'" + e.label + "' is not in the ambient effect signature (" + rule + ")");
      eqAnn(e.input, amb->input, rule);
      eqAnn(e.output, amb->output, rule);
    }
  }

  void split(const VType& x, const VType& y, const VType& z, const std::string& rule) {
    switch (x->kind) {
      case TypeKind::Prod:
        split(x->fst, y->fst, z->fst, rule);
        split(x->snd, y->snd, z->snd, rule);
        break;
      case TypeKind::Sum:
      case TypeKind::List:
        for (size_t i = 0; i < x->anns.size(); ++i) {
          ge(V(x->anns[i].pot), V(y->anns[i].pot) + V(z->anns[i].pot), rule);
          split(x->anns[i].type, y->anns[i].type, z->anns[i].type, rule);
        }
        break;
      case TypeKind::Fun:
        eqArrow(*x->arrow, *y->arrow, rule);
        eqArrow(*x->arrow, *z->arrow, rule);
        break;
      case TypeKind::LinFun:
        throw Error(ErrorKind::LinearReuse, "a linear function cannot be shared (" + rule + ")");
      default: break;
    }
  }

  void zeroOut(const VType& t, const std::string& var, const Comp& at) {
    switch (t->kind) {
      case TypeKind::Prod:
        zeroOut(t->fst, var, at);
        zeroOut(t->snd, var, at);
        break;
      case TypeKind::Sum:
      case TypeKind::List:
        for (const auto& a : t->anns) {
          eq(V(a.pot), LinExpr(0), "T-Handle-zero" + posTag(at));
          zeroOut(a.type, var, at);
        }
        break;
      case TypeKind::LinFun:
        throw Error(ErrorKind::LinearContextInHandler,
                    "handler branch captures '" + var + "' of linear function type", at.pos);
      default: break;
    }
  }

  VArrow instantiate(const std::string& name) {
    const Template& t = cs_.templates.at(name);
    std::map<Var, Var> ren;
    for (Var v = t.v0; v < t.v1; ++v) ren[v] = sys().newVar(fun_ + "." + name + "#" + sys().tag(v));
    auto rename = [&](const Var& v) { return ren.at(v); };
    for (size_t i = t.c0; i < t.c1; ++i) {
      const auto& c = sys().constraints()[i];
      LinExpr e(c.lhs.constant);
      for (const auto& [v, k] : c.lhs.terms) e.add(rename(v), k);
      std::string tag = fun_ + ":" + name + "/" + c.tag;
      if (c.rel == lp::Rel::Ge) {
        sys().addGe(std::move(e), tag);
      } else {
        sys().addEq(std::move(e), tag);
      }
    }
    return mapPots<Var>(t.arrow, rename);
  }

  // Value typing: returns the potential the value needs beyond its type.
  LinExpr val(const ValueRef& v, const VType& t, const Env& env) {
    switch (v->kind) {
      case ValueKind::Var: {
        auto it = env.find(v->name);
        if (it == env.end()) throw Error(ErrorKind::Internal, "untyped variable '" + v->name + "'");
        sub(it->second, t, "T-Var");
        return LinExpr(0);
      }
      case ValueKind::FunRef: {
        if (v->name == fun_ && own_) {
          eqArrow(*own_, *t->arrow, "T-Rec");
        } else {
          if (!cs_.templates.count(v->name))
            throw Error(ErrorKind::Internal, "no template for '" + v->name + "'");
          VArrow inst = instantiate(v->name);
          eqArrow(inst, *t->arrow, "T-Inst");
        }
        return LinExpr(0);
      }
      case ValueKind::Unit:
      case ValueKind::Int:
      case ValueKind::Nil: return LinExpr(0);
      case ValueKind::Pair: return val(v->a, t->fst, env) + val(v->b, t->snd, env);
      case ValueKind::Inl: return val(v->a, t->anns[0].type, env) + V(t->anns[0].pot);
      case ValueKind::Inr: return val(v->a, t->anns[1].type, env) + V(t->anns[1].pot);
      case ValueKind::Cons:
        return val(v->a, t->anns[0].type, env) + V(t->anns[0].pot) + val(v->b, t, env);
      case ValueKind::LinLam: {
        const VArrow& a = *t->arrow;
        Env inner = env;
        inner[v->name] = a.arg.type;
        LinExpr body = check(v->body, inner, a.result.type, V(a.result.pot), a.effects);
        Var q = fresh("lam");
        ge(V(q) + V(a.arg.pot), body, "T-LinFun");
        return V(q);
      }
      case ValueKind::DCont: break;
    }
    throw Error(ErrorKind::Internal, "continuation value in source program");
  }

  // Computation typing: returns the input potential the computation needs
  // to produce ⟨τ, p⟩ under effect signature Δ.
  LinExpr check(const CompRef& e, const Env& env, const VType& tau, const LinExpr& p, const VSig& delta) {
    const Comp& c = *e;
    const std::string at = posTag(c);
    switch (c.kind) {
      case CompKind::Ret: return val(c.v, tau, env) + p;
      case CompKind::Let: {
        VType tx = skel(c.xType, c.x);
        Env inner = env;
        inner[c.x] = tx;
        LinExpr q2 = check(c.e2, inner, tau, p, delta);
        return check(c.e1, env, tx, q2, delta);
      }
      case CompKind::Tick: {
        Var q = fresh("tick");
        ge(V(q), LinExpr(c.amount) + p, "T-Tick" + at);
        return V(q);
      }
      case CompKind::App:
      case CompKind::LinApp: {
        VType ft = skel(c.v->type, "callee");
        LinExpr cost = val(c.v, ft, env);
        const VArrow& a = *ft->arrow;
        cost += val(c.w, a.arg.type, env);
        Var r = fresh("frame");
        sub(a.result.type, tau, "T-App-res" + at);
        ge(V(a.result.pot) + V(r), p, "T-App-res" + at);
        eqSig(a.effects, delta, "T-App-eff" + at);
        return cost + V(a.arg.pot) + V(r);
      }
      case CompKind::CasePair: {
        VType vt = skel(c.v->type, "pair");
        LinExpr cost = val(c.v, vt, env);
        Env inner = env;
        inner[c.x] = vt->fst;
        inner[c.y] = vt->snd;
        return cost + check(c.e1, inner, tau, p, delta);
      }
      case CompKind::CaseSum: {
        VType vt = skel(c.v->type, "sum");
        LinExpr cost = val(c.v, vt, env);
        Env l = env, r = env;
        l[c.x] = vt->anns[0].type;
        r[c.y] = vt->anns[1].type;
        LinExpr q1 = check(c.e1, l, tau, p, delta);
        LinExpr q2 = check(c.e2, r, tau, p, delta);
        Var q = fresh("case");
        ge(V(q) + V(vt->anns[0].pot), q1, "T-Case-inl" + at);
        ge(V(q) + V(vt->anns[1].pot), q2, "T-Case-inr" + at);
        return cost + V(q);
      }
      case CompKind::CaseList: {
        VType vt = skel(c.v->type, "list");
        LinExpr cost = val(c.v, vt, env);
        Env cons = env;
        cons[c.x] = vt->anns[0].type;
        cons[c.y] = vt;
        LinExpr q1 = check(c.e1, env, tau, p, delta);
        LinExpr q2 = check(c.e2, cons, tau, p, delta);
        Var q = fresh("case");
        ge(V(q), q1, "T-Case-nil" + at);
        ge(V(q) + V(vt->anns[0].pot), q2, "T-Case-cons" + at);
        return cost + V(q);
      }
      case CompKind::CaseVoid: return val(c.v, skel(sVoid(), "void"), env);
      case CompKind::Prim: {
        LinExpr cost = val(c.v, skel(sInt(), "int"), env) + val(c.w, skel(sInt(), "int"), env);
        if (c.op == PrimOp::Lt || c.op == PrimOp::Eq) {
          Var q = fresh("cmp");
          ge(V(q), V(tau->anns[0].pot) + p, "T-Cmp" + at);
          ge(V(q), V(tau->anns[1].pot) + p, "T-Cmp" + at);
          return cost + V(q);
        }
        return cost + p;
      }
      case CompKind::Do: {
        const auto* entry = delta.find(c.label);
        if (!entry)
          throw Error(ErrorKind::EffectNotInSignature,
                      "operation '" + c.label + "' is not in the effect signature", c.pos);
        LinExpr cost = val(c.v, entry->input.type, env);
        Var r = fresh("frame");
        sub(entry->output.type, tau, "T-Do" + at);
        ge(V(entry->output.pot) + V(r), p, "T-Do" + at);
        return cost + V(entry->input.pot) + V(r);
      }
      case CompKind::Share: {
        auto it = env.find(c.x);
        if (it == env.end()) throw Error(ErrorKind::Internal, "untyped variable '" + c.x + "'");
        VType ty = skel(c.xType, c.y), tz = skel(c.xType, c.z);
        split(it->second, ty, tz, "T-Share" + at);
        Env inner = env;
        inner.erase(c.x);
        inner[c.y] = ty;
        inner[c.z] = tz;
        return check(c.e1, inner, tau, p, delta);
      }
      case CompKind::Handle: return handle(c, env, tau, p, delta);
      case CompKind::Raise:
      case CompKind::Try: break;
    }
    throw Error(ErrorKind::Internal, "exceptions must be desugared before analysis", c.pos);
  }

  LinExpr handle(const Comp& c, const Env& env, const VType& tau, const LinExpr& p, const VSig& delta) {
    const std::string at = posTag(c);
    EffectSet labels;
    for (const auto& b : c.branches) labels.insert(b.label);
    VSig dh = sig(labels, "handler");
    VType th = skel(c.xType, c.y);
    Var ph = fresh("handled.pot");
    LinExpr qe = check(c.e1, env, th, V(ph), dh);

    Env ret = env;
    ret[c.y] = th;
    ge(V(ph), check(c.e2, ret, tau, p, delta), "T-Handle-ret" + at);

    Var pb = fresh("handler.res");
    eq(V(pb), p, "T-Handle" + at);
    for (const auto& b : c.branches) {
      const auto* entry = dh.find(b.label);
      auto fv = freeVars(b.body);
      fv.erase(b.x);
      fv.erase(b.c);
      for (const auto& x : fv) {
        auto it = env.find(x);
        if (it != env.end()) zeroOut(it->second, x, c);
      }
      VArrow k;
      k.arg = entry->output;
      k.result = {tau, pb};
      k.effects = delta;
      Env inner = env;
      inner[b.x] = entry->input.type;
      inner[b.c] = makeArrowType<Var>(TypeKind::LinFun, k);
      ge(V(entry->input.pot), check(b.body, inner, tau, p, delta), "T-Handle-op:" + b.label + at);
    }
    return qe;
  }
};

}  // namespace

ConstraintSet genConstraints(const CoreProgram& p) {
  ConstraintSet cs;
  Gen g(p, cs);
  for (const auto& f : p.funs) g.function(f);
  return cs;
}

}  // namespace aara::analysis
