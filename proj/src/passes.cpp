#include <functional>
#include <map>
#include <set>

#include "aara/elaborate.hpp"
#include "aara/errors.hpp"

namespace aara {

namespace {

using Rewrite = std::function<CompRef(const CompRef&)>;

// Applies `f` bottom-up to every computation, including lambda bodies.
ValueRef mapValue(const ValueRef& v, const Rewrite& f);

CompRef mapComp(const CompRef& e, const Rewrite& f) {
  if (!e) return e;
  auto n = clone(*e);
  if (n->v) n->v = mapValue(n->v, f);
  if (n->w) n->w = mapValue(n->w, f);
  if (n->e1) n->e1 = mapComp(n->e1, f);
  if (n->e2) n->e2 = mapComp(n->e2, f);
  for (auto& b : n->branches) b.body = mapComp(b.body, f);
  return f(n);
}

ValueRef mapValue(const ValueRef& v, const Rewrite& f) {
  if (!v) return v;
  switch (v->kind) {
    case ValueKind::Pair:
    case ValueKind::Cons:
    case ValueKind::Inl:
    case ValueKind::Inr: {
      auto a = mapValue(v->a, f);
      auto b = mapValue(v->b, f);
      if (a == v->a && b == v->b) return v;
      auto out = std::make_shared<Value>(*v);
      out->a = a;
      out->b = b;
      return out;
    }
    case ValueKind::LinLam: {
      auto out = std::make_shared<Value>(*v);
      out->body = mapComp(v->body, f);
      return out;
    }
    default: return v;
  }
}

CoreProgram mapProgram(const CoreProgram& p, const Rewrite& f) {
  CoreProgram out = p;
  for (auto& fd : out.funs) fd.body = mapComp(fd.body, f);
  if (out.main) out.main = mapComp(out.main, f);
  return out;
}

bool containsLinFun(const STypeRef& t) {
  if (!t) return false;
  if (t->kind == TypeKind::LinFun) return true;
  if (t->kind == TypeKind::Fun) return false;
  return containsLinFun(t->a) || containsLinFun(t->b);
}

// Parts of a node ---------------------------------------------------------
//
// A node's variable uses are split into parts that are evaluated in
// sequence: every variable leaf and lambda in its values, then each
// sub-computation slot. Branches of a case or handler form one slot.

struct Slot {
  std::vector<CompRef*> comps;
  std::vector<std::set<std::string>> binders;
};

void valueParts(const ValueRef& v, std::vector<std::set<std::string>>& out) {
  if (!v) return;
  switch (v->kind) {
    case ValueKind::Var: out.push_back({v->name}); break;
    case ValueKind::LinLam: out.push_back(freeVars(v)); break;
    case ValueKind::Pair:
    case ValueKind::Cons:
      valueParts(v->a, out);
      valueParts(v->b, out);
      break;
    case ValueKind::Inl:
    case ValueKind::Inr: valueParts(v->a, out); break;
    default: break;
  }
}

std::vector<Slot> slotsOf(Comp& n) {
  std::vector<Slot> s;
  switch (n.kind) {
    case CompKind::Let:
      s.push_back({{&n.e1}, {{}}});
      s.push_back({{&n.e2}, {{n.x}}});
      break;
    case CompKind::CasePair: s.push_back({{&n.e1}, {{n.x, n.y}}}); break;
    case CompKind::CaseSum: s.push_back({{&n.e1, &n.e2}, {{n.x}, {n.y}}}); break;
    case CompKind::CaseList: s.push_back({{&n.e1, &n.e2}, {{}, {n.x, n.y}}}); break;
    case CompKind::Try:
      s.push_back({{&n.e1}, {{}}});
      s.push_back({{&n.e2}, {{n.x}}});
      break;
    case CompKind::Share: s.push_back({{&n.e1}, {{n.y, n.z}}}); break;
    case CompKind::Handle: {
      s.push_back({{&n.e1}, {{}}});
      s.push_back({{&n.e2}, {{n.y}}});
      Slot br;
      for (auto& b : n.branches) {
        br.comps.push_back(&b.body);
        br.binders.push_back({b.x, b.c});
      }
      if (!br.comps.empty()) s.push_back(std::move(br));
      break;
    }
    default: break;
  }
  return s;
}

std::vector<std::set<std::string>> partsOf(Comp& n, std::vector<Slot>& slots) {
  std::vector<std::set<std::string>> parts;
  valueParts(n.v, parts);
  valueParts(n.w, parts);
  if (n.kind == CompKind::Share) parts.push_back({n.x});
  for (auto& s : slots) {
    std::set<std::string> fv;
    for (size_t i = 0; i < s.comps.size(); ++i) {
      auto f = freeVars(*s.comps[i]);
      for (const auto& b : s.binders[i]) f.erase(b);
      fv.insert(f.begin(), f.end());
    }
    parts.push_back(std::move(fv));
  }
  return parts;
}

// Type of a free occurrence of `x`.
STypeRef varTypeC(const CompRef& e, const std::string& x);

STypeRef varTypeV(const ValueRef& v, const std::string& x) {
  if (!v) return nullptr;
  switch (v->kind) {
    case ValueKind::Var: return v->name == x ? v->type : nullptr;
    case ValueKind::LinLam: return v->name == x ? nullptr : varTypeC(v->body, x);
    case ValueKind::Pair:
    case ValueKind::Cons:
    case ValueKind::Inl:
    case ValueKind::Inr: {
      if (auto t = varTypeV(v->a, x)) return t;
      return varTypeV(v->b, x);
    }
    default: return nullptr;
  }
}

STypeRef varTypeC(const CompRef& e, const std::string& x) {
  if (!e) return nullptr;
  if (auto t = varTypeV(e->v, x)) return t;
  if (auto t = varTypeV(e->w, x)) return t;
  Comp& n = const_cast<Comp&>(*e);
  for (auto& s : slotsOf(n))
    for (size_t i = 0; i < s.comps.size(); ++i)
      if (!s.binders[i].count(x))
        if (auto t = varTypeC(*s.comps[i], x)) return t;
  return nullptr;
}

using Ren = std::map<std::string, ValueRef>;

ValueRef renameValue(const ValueRef& v, const std::vector<Ren>& ren, size_t& idx) {
  if (!v) return v;
  switch (v->kind) {
    case ValueKind::Var:
    case ValueKind::LinLam: return subst(v, ren[idx++]);
    case ValueKind::Pair:
    case ValueKind::Cons:
    case ValueKind::Inl:
    case ValueKind::Inr: {
      auto out = std::make_shared<Value>(*v);
      out->a = renameValue(v->a, ren, idx);
      if (v->b) out->b = renameValue(v->b, ren, idx);
      return out;
    }
    default: return v;
  }
}

class Sharer {
 public:
  CompRef lin(const CompRef& e) {
    auto n = clone(*e);
    if (n->kind == CompKind::Share)
      throw Error(ErrorKind::Internal, "sharing pass applied twice", n->pos);
    auto slots = slotsOf(*n);
    auto parts = partsOf(*n, slots);

    std::map<std::string, int> count;
    for (const auto& p : parts)
      for (const auto& x : p) ++count[x];

    std::vector<Ren> ren(parts.size());
    struct Split {
      std::string x;
      STypeRef type;
      std::vector<std::string> copies;
    };
    std::vector<Split> splits;
    for (const auto& [x, k] : count) {
      if (k < 2) continue;
      STypeRef t = varTypeC(n, x);
      if (!t) throw Error(ErrorKind::Internal, "no type for variable '" + x + "'", n->pos);
      if (t->kind == TypeKind::Fun) continue;
      if (containsLinFun(t))
        throw Error(ErrorKind::LinearReuse,
                    "linear variable '" + x + "' of type " + show(t) + " is used more than once",
                    n->pos);
      Split s{x, t, {}};
      for (size_t i = 0; i < parts.size(); ++i) {
        if (!parts[i].count(x)) continue;
        std::string copy = x + "%" + std::to_string(counter_++);
        s.copies.push_back(copy);
        ren[i][x] = vVar(copy, t);
      }
      splits.push_back(std::move(s));
    }

    size_t idx = 0;
    n->v = renameValue(n->v, ren, idx);
    n->w = renameValue(n->w, ren, idx);
    for (auto& s : slots) {
      const Ren& r = ren[idx++];
      for (size_t i = 0; i < s.comps.size(); ++i) {
        Ren local = r;
        for (const auto& b : s.binders[i]) local.erase(b);
        *s.comps[i] = subst(*s.comps[i], local);
      }
    }

    n->v = linValue(n->v);
    n->w = linValue(n->w);
    for (auto& s : slots)
      for (auto* c : s.comps) *c = lin(*c);

    CompRef out = n;
    for (auto it = splits.rbegin(); it != splits.rend(); ++it) out = wrap(*it, out);
    return out;
  }

  ValueRef linValue(const ValueRef& v) {
    return mapValueOnce(v);
  }

 private:
  int counter_ = 0;

  ValueRef mapValueOnce(const ValueRef& v) {
    if (!v) return v;
    switch (v->kind) {
      case ValueKind::LinLam: {
        auto out = std::make_shared<Value>(*v);
        out->body = lin(v->body);
        return out;
      }
      case ValueKind::Pair:
      case ValueKind::Cons:
      case ValueKind::Inl:
      case ValueKind::Inr: {
        auto out = std::make_shared<Value>(*v);
        out->a = mapValueOnce(v->a);
        out->b = mapValueOnce(v->b);
        return out;
      }
      default: return v;
    }
  }

  template <class S>
  CompRef wrap(const S& s, CompRef body) {
    // share x as c1, r1 in share r1 as c2, r2 in ... share r(k-2) as c(k-1), ck
    std::string src = s.x;
    std::vector<std::shared_ptr<Comp>> chain;
    for (size_t i = 0; i + 1 < s.copies.size(); ++i) {
      auto sh = std::make_shared<Comp>();
      sh->kind = CompKind::Share;
      sh->type = body->type;
      sh->x = src;
      sh->xType = s.type;
      sh->y = s.copies[i];
      if (i + 2 == s.copies.size()) {
        sh->z = s.copies[i + 1];
      } else {
        sh->z = s.x + "%r" + std::to_string(counter_++);
      }
      src = sh->z;
      chain.push_back(sh);
    }
    CompRef acc = std::move(body);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      (*it)->e1 = acc;
      acc = *it;
    }
    return acc;
  }
};

bool linearC(const CompRef& e, std::string* why);

bool linearV(const ValueRef& v, std::string* why) {
  if (!v) return true;
  switch (v->kind) {
    case ValueKind::LinLam: return linearC(v->body, why);
    case ValueKind::Pair:
    case ValueKind::Cons:
    case ValueKind::Inl:
    case ValueKind::Inr: return linearV(v->a, why) && linearV(v->b, why);
    default: return true;
  }
}

bool linearC(const CompRef& e, std::string* why) {
  if (!e) return true;
  Comp& n = const_cast<Comp&>(*e);
  auto slots = slotsOf(n);
  auto parts = partsOf(n, slots);
  std::map<std::string, int> count;
  for (const auto& p : parts)
    for (const auto& x : p) ++count[x];
  for (const auto& [x, k] : count) {
    if (k < 2) continue;
    STypeRef t = varTypeC(e, x);
    if (t && t->kind == TypeKind::Fun) continue;
    if (why) *why = x;
    return false;
  }
  if (!linearV(n.v, why) || !linearV(n.w, why)) return false;
  for (auto& s : slots)
    for (auto* c : s.comps)
      if (!linearC(*c, why)) return false;
  return true;
}

}  // namespace

CoreProgram desugarExceptions(const CoreProgram& p) {
  const EffectDecl* exc = p.findEffect(surface::kExcLabel);
  int counter = 0;
  auto fresh = [&]() { return "%e" + std::to_string(counter++); };
  return mapProgram(p, [&](const CompRef& e) -> CompRef {
    if (e->kind == CompKind::Raise) {
      std::string x = fresh();
      auto absurd = std::make_shared<Comp>();
      absurd->kind = CompKind::CaseVoid;
      absurd->type = e->type;
      absurd->v = vVar(x, sVoid());
      absurd->pos = e->pos;
      auto d = cDo(surface::kExcLabel, e->v, exc->output);
      std::const_pointer_cast<Comp>(d)->pos = e->pos;
      auto let = clone(*cLet(x, exc->output, d, absurd));
      let->pos = e->pos;
      return let;
    }
    if (e->kind != CompKind::Try) return e;
    auto h = std::make_shared<Comp>();
    h->kind = CompKind::Handle;
    h->type = e->type;
    h->pos = e->pos;
    h->outer = e->outer;
    h->e1 = e->e1;
    h->y = fresh();
    h->xType = e->e1->type;
    h->e2 = cRet(vVar(h->y, h->xType));
    h->branches.push_back({surface::kExcLabel, e->x, fresh(), e->e2});
    for (const auto& d : p.effects) {
      if (d.label == surface::kExcLabel || !e->outer.count(d.label)) continue;
      std::string x = fresh(), c = fresh(), r = fresh();
      STypeRef tc = sLinFun(d.output, e->type, e->outer);
      h->branches.push_back({d.label, x, c,
                             cLet(r, d.output, cDo(d.label, vVar(x, d.input), d.output),
                                  cLinApp(vVar(c, tc), vVar(r, d.output), e->type))});
    }
    return h;
  });
}

CoreProgram insertSharing(const CoreProgram& p) {
  CoreProgram out = p;
  Sharer s;
  for (auto& f : out.funs) f.body = s.lin(f.body);
  if (out.main) out.main = s.lin(out.main);
  return out;
}

bool isSyntacticallyLinear(const CoreProgram& p, std::string* why) {
  for (const auto& f : p.funs)
    if (!linearC(f.body, why)) return false;
  return !p.main || linearC(p.main, why);
}

CoreProgram insertTicks(const CoreProgram& p, CostMetric m) {
  if (!m.tickCalls && !m.tickHandlers) return p;
  auto tick = [](const CompRef& e) { return cLet("_", sUnit(), cTick(1), e); };
  // Continuation binders of enclosing handler branches.
  std::function<CompRef(const CompRef&, const std::set<std::string>&)> go;
  std::function<ValueRef(const ValueRef&, const std::set<std::string>&)> goV;
  goV = [&](const ValueRef& v, const std::set<std::string>& conts) -> ValueRef {
    if (!v) return v;
    if (v->kind == ValueKind::LinLam) {
      auto out = std::make_shared<Value>(*v);
      std::set<std::string> inner = conts;
      inner.erase(v->name);
      out->body = go(v->body, inner);
      return out;
    }
    if (v->kind == ValueKind::Pair || v->kind == ValueKind::Cons || v->kind == ValueKind::Inl ||
        v->kind == ValueKind::Inr) {
      auto out = std::make_shared<Value>(*v);
      out->a = goV(v->a, conts);
      out->b = goV(v->b, conts);
      return out;
    }
    return v;
  };
  go = [&](const CompRef& e, const std::set<std::string>& conts) -> CompRef {
    if (!e) return e;
    auto n = clone(*e);
    n->v = goV(n->v, conts);
    n->w = goV(n->w, conts);
    auto under = [&](const CompRef& c, std::initializer_list<std::string> binders) {
      std::set<std::string> inner = conts;
      for (const auto& b : binders) inner.erase(b);
      return go(c, inner);
    };
    switch (n->kind) {
      case CompKind::Let:
        n->e1 = go(n->e1, conts);
        n->e2 = under(n->e2, {n->x});
        break;
      case CompKind::CasePair: n->e1 = under(n->e1, {n->x, n->y}); break;
      case CompKind::CaseSum:
        n->e1 = under(n->e1, {n->x});
        n->e2 = under(n->e2, {n->y});
        break;
      case CompKind::CaseList:
        n->e1 = go(n->e1, conts);
        n->e2 = under(n->e2, {n->x, n->y});
        break;
      case CompKind::Share: n->e1 = under(n->e1, {n->y, n->z}); break;
      case CompKind::Try:
        n->e1 = go(n->e1, conts);
        n->e2 = under(n->e2, {n->x});
        break;
      case CompKind::Handle:
        n->e1 = go(n->e1, conts);
        n->e2 = under(n->e2, {n->y});
        for (auto& b : n->branches) {
          std::set<std::string> inner = conts;
          inner.erase(b.x);
          inner.insert(b.c);
          b.body = go(b.body, inner);
          if (m.tickHandlers) b.body = tick(b.body);
        }
        break;
      default: break;
    }
    if (m.tickCalls) {
      bool resume = n->kind == CompKind::LinApp && n->v->kind == ValueKind::Var &&
                    conts.count(n->v->name);
      if (n->kind == CompKind::App || (n->kind == CompKind::LinApp && !resume)) return tick(n);
    }
    return n;
  };
  CoreProgram out = p;
  for (auto& f : out.funs) f.body = go(f.body, {});
  if (out.main) out.main = go(out.main, {});
  return out;
}

CoreProgram elaborate(const surface::SurfaceProgram& p, CostMetric m) {
  return insertTicks(insertSharing(desugarExceptions(lowerToFineGrain(p))), m);
}

CoreProgram elaborate(std::string_view source, CostMetric m) {
  return elaborate(surface::parse(source), m);
}

}  // namespace aara
