#include <functional>
#include <map>
#include <set>

#include "aara/elaborate.hpp"
#include "aara/errors.hpp"

namespace aara {

using surface::Expr;
using surface::ExprKind;
using surface::ExprRef;

namespace {

// Unification types --------------------------------------------------------

struct UT;
using U = std::shared_ptr<UT>;

struct UT {
  bool isVar = false;
  TypeKind kind = TypeKind::Unit;
  U a, b;
  EffectSet effects;
  U link;
};

U fresh() {
  auto u = std::make_shared<UT>();
  u->isVar = true;
  return u;
}

U con(TypeKind k, U a = nullptr, U b = nullptr, EffectSet eff = {}) {
  auto u = std::make_shared<UT>();
  u->kind = k;
  u->a = std::move(a);
  u->b = std::move(b);
  u->effects = std::move(eff);
  return u;
}

U find(U u) {
  while (u->isVar && u->link) u = u->link;
  return u;
}

U fromS(const STypeRef& s) {
  return con(s->kind, s->a ? fromS(s->a) : nullptr, s->b ? fromS(s->b) : nullptr, s->effects);
}

STypeRef toS(const U& u0) {
  U u = find(u0);
  if (u->isVar) return sUnit();
  switch (u->kind) {
    case TypeKind::Unit: return sUnit();
    case TypeKind::Void: return sVoid();
    case TypeKind::Int: return sInt();
    case TypeKind::Prod: return sProd(toS(u->a), toS(u->b));
    case TypeKind::Sum: return sSum(toS(u->a), toS(u->b));
    case TypeKind::List: return sList(toS(u->a));
    case TypeKind::Fun: return sFun(toS(u->a), toS(u->b), u->effects);
    case TypeKind::LinFun: return sLinFun(toS(u->a), toS(u->b), u->effects);
  }
  return sUnit();
}

std::string showU(const U& u) {
  U r = find(u);
  if (r->isVar) return "'_";
  switch (r->kind) {
    case TypeKind::Prod: return "(" + showU(r->a) + " * " + showU(r->b) + ")";
    case TypeKind::Sum: return "(" + showU(r->a) + " + " + showU(r->b) + ")";
    case TypeKind::List: return "list(" + showU(r->a) + ")";
    case TypeKind::Fun:
    case TypeKind::LinFun:
      return "(" + showU(r->a) + (r->kind == TypeKind::Fun ? " -> " : " -o ") + showU(r->b) + ")";
    default: return show(toS(r));
  }
}

bool occurs(const U& v, const U& t0) {
  U t = find(t0);
  if (t == v) return true;
  if (t->isVar) return false;
  return (t->a && occurs(v, t->a)) || (t->b && occurs(v, t->b));
}

void unify(const U& x0, const U& y0, SrcPos pos, const char* what) {
  U x = find(x0), y = find(y0);
  if (x == y) return;
  auto fail = [&]() {
    throw Error(ErrorKind::Type,
                std::string(what) + ": cannot match " + showU(x) + " with " + showU(y), pos);
  };
  if (x->isVar || y->isVar) {
    U v = x->isVar ? x : y;
    U t = x->isVar ? y : x;
    if (occurs(v, t)) fail();
    v->link = t;
    return;
  }
  if (x->kind != y->kind) fail();
  if ((x->kind == TypeKind::Fun || x->kind == TypeKind::LinFun) && x->effects != y->effects) fail();
  if (x->a) unify(x->a, y->a, pos, what);
  if (x->b) unify(x->b, y->b, pos, what);
}

std::string labelsText(const EffectSet& s) {
  std::string out;
  for (const auto& l : s) out += (out.empty() ? "" : ", ") + l;
  return "{" + out + "}";
}

// Pass 1: inference ----------------------------------------------------------

using Env = std::map<std::string, U>;

struct Inference {
  const surface::SurfaceProgram& prog;
  std::map<std::string, const surface::EffectDecl*> effects;
  std::map<std::string, STypeRef> globals;  // function name -> Fun type
  std::map<const Expr*, U> exprTy;
  std::map<std::pair<const Expr*, int>, U> binderTy;
  std::map<std::string, std::set<std::string>> calls;  // static references
  std::string current;

  const surface::EffectDecl& effect(const std::string& l, SrcPos pos) const {
    auto it = effects.find(l);
    if (it == effects.end())
      throw Error(ErrorKind::UnknownEffectLabel, "unknown effect '" + l + "'", pos);
    return *it->second;
  }

  void requireLabel(const std::string& l, const EffectSet& amb, SrcPos pos) const {
    if (!amb.count(l))
      throw Error(ErrorKind::EffectNotInSignature,
                  "operation '" + l + "' is not in the ambient effect set " + labelsText(amb), pos);
  }

  U infer(const ExprRef& e, const Env& env, const EffectSet& amb) {
    U t = inferRaw(e, env, amb);
    exprTy[e.get()] = t;
    return t;
  }

  U inferRaw(const ExprRef& e, const Env& env, const EffectSet& amb) {
    const Expr* k = e.get();
    auto with = [&](std::initializer_list<std::pair<std::string, U>> bs) {
      Env out = env;
      for (const auto& [n, t] : bs) out[n] = t;
      return out;
    };
    switch (e->kind) {
      case ExprKind::Var: {
        if (auto it = env.find(e->name); it != env.end()) return it->second;
        if (auto g = globals.find(e->name); g != globals.end()) {
          calls[current].insert(e->name);
          return fromS(g->second);
        }
        throw Error(ErrorKind::Scope, "unbound variable '" + e->name + "'", e->pos);
      }
      case ExprKind::Int: return con(TypeKind::Int);
      case ExprKind::Unit: return con(TypeKind::Unit);
      case ExprKind::Nil: return con(TypeKind::List, fresh());
      case ExprKind::Pair: {
        U a = infer(e->a, env, amb);
        U b = infer(e->b, env, amb);
        return con(TypeKind::Prod, a, b);
      }
      case ExprKind::Inl: return con(TypeKind::Sum, infer(e->a, env, amb), fresh());
      case ExprKind::Inr: return con(TypeKind::Sum, fresh(), infer(e->a, env, amb));
      case ExprKind::Cons: {
        U h = infer(e->a, env, amb);
        U t = infer(e->b, env, amb);
        unify(t, con(TypeKind::List, h), e->pos, "list cons");
        return t;
      }
      case ExprKind::Let: {
        U t1 = infer(e->a, env, amb);
        binderTy[{k, 0}] = t1;
        return infer(e->b, with({{e->name, t1}}), amb);
      }
      case ExprKind::Tick: return con(TypeKind::Unit);
      case ExprKind::Do: {
        const auto& d = effect(e->name, e->pos);
        requireLabel(e->name, amb, e->pos);
        unify(infer(e->a, env, amb), fromS(d.input), e->pos, "operation payload");
        return fromS(d.output);
      }
      case ExprKind::Raise: {
        const auto& d = effect(surface::kExcLabel, e->pos);
        requireLabel(surface::kExcLabel, amb, e->pos);
        unify(infer(e->a, env, amb), fromS(d.input), e->pos, "raised value");
        return fresh();
      }
      case ExprKind::Try: {
        const auto& d = effect(surface::kExcLabel, e->pos);
        EffectSet inner = amb;
        inner.insert(surface::kExcLabel);
        U t1 = infer(e->a, env, inner);
        U tx = fromS(d.input);
        binderTy[{k, 0}] = tx;
        U t2 = infer(e->b, with({{e->name, tx}}), amb);
        unify(t1, t2, e->pos, "try/catch branches");
        return t1;
      }
      case ExprKind::Handle: {
        EffectSet handled;
        for (const auto& c : e->clauses) handled.insert(c.label);
        for (const auto& l : e->forwards) {
          requireLabel(l, amb, e->pos);
          handled.insert(l);
        }
        U te = infer(e->a, env, handled);
        binderTy[{k, 0}] = te;
        U result = infer(e->b, with({{e->name, te}}), amb);
        for (size_t i = 0; i < e->clauses.size(); ++i) {
          const auto& c = e->clauses[i];
          const auto& d = effect(c.label, c.pos);
          U tx = fromS(d.input);
          U tc = con(TypeKind::LinFun, fromS(d.output), result, amb);
          binderTy[{k, 10 + 2 * static_cast<int>(i)}] = tx;
          binderTy[{k, 11 + 2 * static_cast<int>(i)}] = tc;
          U tb = infer(c.body, with({{c.x, tx}, {c.c, tc}}), amb);
          unify(tb, result, c.pos, "handler branch");
        }
        return result;
      }
      case ExprKind::MatchList: {
        U ts = infer(e->a, env, amb);
        U el = fresh();
        U lt = con(TypeKind::List, el);
        unify(ts, lt, e->pos, "list match");
        binderTy[{k, 0}] = el;
        binderTy[{k, 1}] = lt;
        U tb = infer(e->b, env, amb);
        U tc = infer(e->c, with({{e->x, el}, {e->y, lt}}), amb);
        unify(tb, tc, e->pos, "match branches");
        return tb;
      }
      case ExprKind::MatchSum: {
        U l = fresh(), r = fresh();
        unify(infer(e->a, env, amb), con(TypeKind::Sum, l, r), e->pos, "sum match");
        binderTy[{k, 0}] = l;
        binderTy[{k, 1}] = r;
        U tb = infer(e->b, with({{e->x, l}}), amb);
        U tc = infer(e->c, with({{e->y, r}}), amb);
        unify(tb, tc, e->pos, "match branches");
        return tb;
      }
      case ExprKind::MatchPair: {
        U l = fresh(), r = fresh();
        unify(infer(e->a, env, amb), con(TypeKind::Prod, l, r), e->pos, "pair match");
        binderTy[{k, 0}] = l;
        binderTy[{k, 1}] = r;
        return infer(e->b, with({{e->x, l}, {e->y, r}}), amb);
      }
      case ExprKind::Absurd:
        unify(infer(e->a, env, amb), con(TypeKind::Void), e->pos, "absurd");
        return fresh();
      case ExprKind::Lam: {
        U tx = fresh();
        binderTy[{k, 0}] = tx;
        U tb = infer(e->a, with({{e->name, tx}}), amb);
        return con(TypeKind::LinFun, tx, tb, amb);
      }
      case ExprKind::Binop: {
        unify(infer(e->a, env, amb), con(TypeKind::Int), e->pos, "arithmetic operand");
        unify(infer(e->b, env, amb), con(TypeKind::Int), e->pos, "arithmetic operand");
        if (e->op == PrimOp::Lt || e->op == PrimOp::Eq)
          return con(TypeKind::Sum, con(TypeKind::Unit), con(TypeKind::Unit));
        return con(TypeKind::Int);
      }
      case ExprKind::App: {
        U tf = find(infer(e->a, env, amb));
        U ta = infer(e->b, env, amb);
        if (tf->isVar) {
          U r = fresh();
          unify(tf, con(TypeKind::LinFun, ta, r, amb), e->pos, "application");
          return r;
        }
        if (tf->kind != TypeKind::Fun && tf->kind != TypeKind::LinFun)
          throw Error(ErrorKind::Type, "applying a value of type " + showU(tf), e->pos);
        unify(tf->a, ta, e->pos, "argument");
        return tf->b;
      }
    }
    throw Error(ErrorKind::Internal, "unknown expression", e->pos);
  }
};

// Pass 2: A-normalisation --------------------------------------------------

using TEnv = std::map<std::string, STypeRef>;
using K = std::function<CompRef(ValueRef)>;

struct Lowerer {
  Inference& inf;
  int counter = 0;

  std::string freshName() { return "%t" + std::to_string(counter++); }

  STypeRef ty(const ExprRef& e) const { return toS(inf.exprTy.at(e.get())); }
  STypeRef binder(const Expr* e, int slot) const { return toS(inf.binderTy.at({e, slot})); }

  static std::shared_ptr<Comp> mk(CompKind k, STypeRef t, SrcPos pos) {
    auto c = std::make_shared<Comp>();
    c->kind = k;
    c->type = std::move(t);
    c->pos = pos;
    return c;
  }

  static TEnv with(const TEnv& env, std::initializer_list<std::pair<std::string, STypeRef>> bs) {
    TEnv out = env;
    for (const auto& [n, t] : bs) out[n] = t;
    return out;
  }

  CompRef comp(const ExprRef& e, const TEnv& env, const EffectSet& amb) {
    const Expr* k = e.get();
    switch (e->kind) {
      case ExprKind::Let: {
        STypeRef tx = binder(k, 0);
        auto c = mk(CompKind::Let, ty(e), e->pos);
        c->x = e->name;
        c->xType = tx;
        c->e1 = comp(e->a, env, amb);
        c->e2 = comp(e->b, with(env, {{e->name, tx}}), amb);
        return c;
      }
      case ExprKind::Tick: {
        auto c = mk(CompKind::Tick, sUnit(), e->pos);
        c->amount = e->amount;
        return c;
      }
      case ExprKind::Do:
        return val(e->a, env, amb, [&](ValueRef v) {
          auto c = mk(CompKind::Do, ty(e), e->pos);
          c->label = e->name;
          c->v = std::move(v);
          return CompRef(c);
        });
      case ExprKind::Raise:
        return val(e->a, env, amb, [&](ValueRef v) {
          auto c = mk(CompKind::Raise, ty(e), e->pos);
          c->v = std::move(v);
          return CompRef(c);
        });
      case ExprKind::Try: {
        EffectSet inner = amb;
        inner.insert(surface::kExcLabel);
        auto c = mk(CompKind::Try, ty(e), e->pos);
        c->e1 = comp(e->a, env, inner);
        c->x = e->name;
        c->xType = binder(k, 0);
        c->e2 = comp(e->b, with(env, {{e->name, c->xType}}), amb);
        c->outer = amb;
        return c;
      }
      case ExprKind::Handle: return handle(e, env, amb);
      case ExprKind::MatchList:
        return val(e->a, env, amb, [&](ValueRef v) {
          auto c = mk(CompKind::CaseList, ty(e), e->pos);
          c->v = std::move(v);
          c->x = e->x;
          c->y = e->y;
          c->e1 = comp(e->b, env, amb);
          c->e2 = comp(e->c, with(env, {{e->x, binder(k, 0)}, {e->y, binder(k, 1)}}), amb);
          return CompRef(c);
        });
      case ExprKind::MatchSum:
        return val(e->a, env, amb, [&](ValueRef v) {
          auto c = mk(CompKind::CaseSum, ty(e), e->pos);
          c->v = std::move(v);
          c->x = e->x;
          c->y = e->y;
          c->e1 = comp(e->b, with(env, {{e->x, binder(k, 0)}}), amb);
          c->e2 = comp(e->c, with(env, {{e->y, binder(k, 1)}}), amb);
          return CompRef(c);
        });
      case ExprKind::MatchPair:
        return val(e->a, env, amb, [&](ValueRef v) {
          auto c = mk(CompKind::CasePair, ty(e), e->pos);
          c->v = std::move(v);
          c->x = e->x;
          c->y = e->y;
          c->e1 = comp(e->b, with(env, {{e->x, binder(k, 0)}, {e->y, binder(k, 1)}}), amb);
          return CompRef(c);
        });
      case ExprKind::Absurd:
        return val(e->a, env, amb, [&](ValueRef v) {
          auto c = mk(CompKind::CaseVoid, ty(e), e->pos);
          c->v = std::move(v);
          return CompRef(c);
        });
      case ExprKind::Binop:
        return val(e->a, env, amb, [&](ValueRef va) {
          return val(e->b, env, amb, [&](ValueRef vb) {
            auto c = mk(CompKind::Prim, ty(e), e->pos);
            c->op = e->op;
            c->v = va;
            c->w = std::move(vb);
            return CompRef(c);
          });
        });
      case ExprKind::App:
        return val(e->a, env, amb, [&](ValueRef vf) {
          return val(e->b, env, amb, [&](ValueRef va) {
            const auto& ft = vf->type;
            for (const auto& l : ft->effects)
              if (!amb.count(l))
                throw Error(ErrorKind::EffectNotInSignature,
                            "call may perform '" + l + "', which is not in the ambient effect set " +
                                labelsText(amb),
                            e->pos);
            auto c = mk(ft->kind == TypeKind::Fun ? CompKind::App : CompKind::LinApp, ty(e), e->pos);
            c->v = vf;
            c->w = std::move(va);
            return CompRef(c);
          });
        });
      default: return val(e, env, amb, [](ValueRef v) { return cRet(std::move(v)); });
    }
  }

  CompRef handle(const ExprRef& e, const TEnv& env, const EffectSet& amb) {
    const Expr* k = e.get();
    EffectSet handled;
    for (const auto& c : e->clauses) handled.insert(c.label);
    for (const auto& l : e->forwards) handled.insert(l);
    STypeRef result = ty(e);
    auto h = mk(CompKind::Handle, result, e->pos);
    h->e1 = comp(e->a, env, handled);
    h->y = e->name;
    h->xType = binder(k, 0);
    h->e2 = comp(e->b, with(env, {{e->name, h->xType}}), amb);
    h->outer = amb;
    for (size_t i = 0; i < e->clauses.size(); ++i) {
      const auto& c = e->clauses[i];
      STypeRef tx = binder(k, 10 + 2 * static_cast<int>(i));
      STypeRef tc = binder(k, 11 + 2 * static_cast<int>(i));
      h->branches.push_back({c.label, c.x, c.c, comp(c.body, with(env, {{c.x, tx}, {c.c, tc}}), amb)});
    }
    for (const auto& l : e->forwards) {
      const auto& d = inf.effect(l, e->pos);
      std::string x = freshName(), c = freshName(), r = freshName();
      STypeRef tc = sLinFun(d.output, result, amb);
      CompRef body = cLet(r, d.output, cDo(l, vVar(x, d.input), d.output),
                          cLinApp(vVar(c, tc), vVar(r, d.output), result));
      h->branches.push_back({l, x, c, body});
    }
    return h;
  }

  CompRef val(const ExprRef& e, const TEnv& env, const EffectSet& amb, const K& k) {
    switch (e->kind) {
      case ExprKind::Var: {
        if (auto it = env.find(e->name); it != env.end()) return k(vVar(e->name, it->second));
        return k(vFunRef(e->name, inf.globals.at(e->name)));
      }
      case ExprKind::Int: return k(vInt(e->num));
      case ExprKind::Unit: return k(vUnit());
      case ExprKind::Nil: return k(vNil(ty(e)));
      case ExprKind::Pair:
        return val(e->a, env, amb,
                   [&](ValueRef a) { return val(e->b, env, amb, [&](ValueRef b) { return k(vPair(a, b)); }); });
      case ExprKind::Inl: return val(e->a, env, amb, [&](ValueRef a) { return k(vInl(a, ty(e))); });
      case ExprKind::Inr: return val(e->a, env, amb, [&](ValueRef a) { return k(vInr(a, ty(e))); });
      case ExprKind::Cons:
        return val(e->a, env, amb, [&](ValueRef h) {
          return val(e->b, env, amb, [&](ValueRef t) { return k(vCons(h, t)); });
        });
      case ExprKind::Lam: {
        STypeRef tx = binder(e.get(), 0);
        CompRef body = comp(e->a, with(env, {{e->name, tx}}), amb);
        return k(vLinLam(e->name, ty(e), body));
      }
      default: {
        std::string t = freshName();
        STypeRef tt = ty(e);
        CompRef first = comp(e, env, amb);
        TEnv env2 = with(env, {{t, tt}});
        auto c = mk(CompKind::Let, nullptr, e->pos);
        CompRef rest = k(vVar(t, tt));
        c->type = rest->type;
        c->x = t;
        c->xType = tt;
        c->e1 = first;
        c->e2 = rest;
        return c;
      }
    }
  }
};

bool mentionsExceptions(const ExprRef& e) {
  if (!e) return false;
  if (e->kind == ExprKind::Raise || e->kind == ExprKind::Try) return true;
  if (e->kind == ExprKind::Do && e->name == surface::kExcLabel) return true;
  for (const auto& c : e->clauses)
    if (c.label == surface::kExcLabel || mentionsExceptions(c.body)) return true;
  for (const auto& l : e->forwards)
    if (l == surface::kExcLabel) return true;
  return mentionsExceptions(e->a) || mentionsExceptions(e->b) || mentionsExceptions(e->c);
}

bool typeMentions(const STypeRef& t, const std::string& l) {
  if (!t) return false;
  return t->effects.count(l) || typeMentions(t->a, l) || typeMentions(t->b, l);
}

}  // namespace

CoreProgram lowerToFineGrain(const surface::SurfaceProgram& src) {
  surface::SurfaceProgram p = src;
  bool hasExc = false;
  for (const auto& d : p.effects) hasExc |= d.label == surface::kExcLabel;
  if (!hasExc) {
    bool needed = mentionsExceptions(p.main);
    for (const auto& f : p.funs)
      needed |= mentionsExceptions(f.body) || f.effects.count(surface::kExcLabel) ||
                typeMentions(f.paramType, surface::kExcLabel) ||
                typeMentions(f.resultType, surface::kExcLabel);
    if (needed) p.effects.push_back({surface::kExcLabel, sUnit(), sVoid(), {}});
  }

  Inference inf{p, {}, {}, {}, {}, {}, {}};
  for (const auto& d : p.effects) inf.effects[d.label] = &d;
  for (const auto& f : p.funs) inf.globals[f.name] = sFun(f.paramType, f.resultType, f.effects);

  for (const auto& f : p.funs) {
    inf.current = f.name;
    U t = inf.infer(f.body, {{f.param, fromS(f.paramType)}}, f.effects);
    unify(t, fromS(f.resultType), f.body->pos, ("result of '" + f.name + "'").c_str());
  }
  if (p.main) {
    inf.current = "";
    inf.infer(p.main, {}, {});
  }

  // Callee-first order; only direct self-recursion is supported.
  std::vector<const surface::FunDecl*> order;
  std::map<std::string, int> state;  // 1 = on stack, 2 = done
  std::function<void(const surface::FunDecl&)> visit = [&](const surface::FunDecl& f) {
    state[f.name] = 1;
    for (const auto& g : inf.calls[f.name]) {
      if (g == f.name) continue;
      if (state[g] == 1)
        throw Error(ErrorKind::Unsupported,
                    "mutual recursion between '" + f.name + "' and '" + g + "' is not supported",
                    f.pos);
      if (state[g] == 0)
        for (const auto& h : p.funs)
          if (h.name == g) visit(h);
    }
    state[f.name] = 2;
    order.push_back(&f);
  };
  for (const auto& f : p.funs)
    if (state[f.name] == 0) visit(f);

  CoreProgram out;
  for (const auto& d : p.effects) out.effects.push_back({d.label, d.input, d.output, d.pos});
  for (const auto* f : order) {
    Lowerer low{inf};
    FunDecl fd;
    fd.name = f->name;
    fd.param = f->param;
    fd.paramType = f->paramType;
    fd.resultType = f->resultType;
    fd.effects = f->effects;
    fd.pos = f->pos;
    fd.body = low.comp(f->body, {{f->param, f->paramType}}, f->effects);
    out.funs.push_back(std::move(fd));
  }
  if (p.main) {
    Lowerer low{inf};
    out.main = low.comp(p.main, {}, {});
  }
  return out;
}

}  // namespace aara
