#include "aara/syntax.hpp"

#include <sstream>

namespace aara {

const FunDecl* CoreProgram::findFun(const std::string& name) const {
  for (const auto& f : funs)
    if (f.name == name) return &f;
  return nullptr;
}

const EffectDecl* CoreProgram::findEffect(const std::string& label) const {
  for (const auto& e : effects)
    if (e.label == label) return &e;
  return nullptr;
}

int CoreProgram::effectIndex(const std::string& label) const {
  for (size_t i = 0; i < effects.size(); ++i)
    if (effects[i].label == label) return static_cast<int>(i);
  return -1;
}

namespace {

std::shared_ptr<Value> mkv(ValueKind k, STypeRef t) {
  auto v = std::make_shared<Value>();
  v->kind = k;
  v->type = std::move(t);
  return v;
}

std::shared_ptr<Comp> mkc(CompKind k, STypeRef t) {
  auto c = std::make_shared<Comp>();
  c->kind = k;
  c->type = std::move(t);
  return c;
}

}  // namespace

ValueRef vVar(std::string name, STypeRef type) {
  auto v = mkv(ValueKind::Var, std::move(type));
  v->name = std::move(name);
  return v;
}
ValueRef vFunRef(std::string name, STypeRef type) {
  auto v = mkv(ValueKind::FunRef, std::move(type));
  v->name = std::move(name);
  return v;
}
ValueRef vUnit() {
  static const ValueRef u = mkv(ValueKind::Unit, sUnit());
  return u;
}
ValueRef vInt(std::int64_t n) {
  auto v = mkv(ValueKind::Int, sInt());
  v->num = n;
  return v;
}
ValueRef vPair(ValueRef a, ValueRef b) {
  auto v = mkv(ValueKind::Pair, sProd(a->type, b->type));
  v->a = std::move(a);
  v->b = std::move(b);
  return v;
}
ValueRef vInl(ValueRef a, STypeRef sumType) {
  auto v = mkv(ValueKind::Inl, std::move(sumType));
  v->a = std::move(a);
  return v;
}
ValueRef vInr(ValueRef a, STypeRef sumType) {
  auto v = mkv(ValueKind::Inr, std::move(sumType));
  v->a = std::move(a);
  return v;
}
ValueRef vNil(STypeRef listType) { return mkv(ValueKind::Nil, std::move(listType)); }
ValueRef vCons(ValueRef h, ValueRef t) {
  auto v = mkv(ValueKind::Cons, t->type);
  v->a = std::move(h);
  v->b = std::move(t);
  return v;
}
ValueRef vLinLam(std::string x, STypeRef type, CompRef body) {
  auto v = mkv(ValueKind::LinLam, std::move(type));
  v->name = std::move(x);
  v->body = std::move(body);
  return v;
}
ValueRef vDCont(std::shared_ptr<ContCell> cell) {
  auto v = mkv(ValueKind::DCont, cell->type);
  v->cont = std::move(cell);
  return v;
}

ValueRef vList(const std::vector<ValueRef>& elems, const STypeRef& elemType) {
  auto lt = sList(elemType);
  ValueRef acc = vNil(lt);
  for (auto it = elems.rbegin(); it != elems.rend(); ++it) acc = vCons(*it, acc);
  return acc;
}

CompRef cRet(ValueRef v) {
  auto c = mkc(CompKind::Ret, v->type);
  c->v = std::move(v);
  return c;
}
CompRef cLet(std::string x, STypeRef xType, CompRef e1, CompRef e2) {
  auto c = mkc(CompKind::Let, e2->type);
  c->x = std::move(x);
  c->xType = std::move(xType);
  c->e1 = std::move(e1);
  c->e2 = std::move(e2);
  return c;
}
CompRef cTick(Rat q) {
  auto c = mkc(CompKind::Tick, sUnit());
  c->amount = std::move(q);
  return c;
}
CompRef cApp(ValueRef f, ValueRef arg, STypeRef resultType) {
  auto c = mkc(CompKind::App, std::move(resultType));
  c->v = std::move(f);
  c->w = std::move(arg);
  return c;
}
CompRef cLinApp(ValueRef f, ValueRef arg, STypeRef resultType) {
  auto c = mkc(CompKind::LinApp, std::move(resultType));
  c->v = std::move(f);
  c->w = std::move(arg);
  return c;
}
CompRef cDo(std::string label, ValueRef payload, STypeRef resultType) {
  auto c = mkc(CompKind::Do, std::move(resultType));
  c->label = std::move(label);
  c->v = std::move(payload);
  return c;
}

std::shared_ptr<Comp> clone(const Comp& c) { return std::make_shared<Comp>(c); }

// Substitution ---------------------------------------------------------------

namespace {

using Sub = std::map<std::string, ValueRef>;

// Returns s without the given binders, or nullptr if nothing is left to
// substitute (so the caller can share the subtree).
const Sub* without(const Sub& s, std::initializer_list<const std::string*> binders, Sub& storage) {
  bool hit = false;
  for (auto* b : binders)
    if (!b->empty() && s.count(*b)) hit = true;
  if (!hit) return &s;
  storage = s;
  for (auto* b : binders)
    if (!b->empty()) storage.erase(*b);
  return storage.empty() ? nullptr : &storage;
}

}  // namespace

ValueRef subst(const ValueRef& v, const Sub& s) {
  if (!v || s.empty()) return v;
  switch (v->kind) {
    case ValueKind::Var: {
      auto it = s.find(v->name);
      return it == s.end() ? v : it->second;
    }
    case ValueKind::FunRef:
    case ValueKind::Unit:
    case ValueKind::Int:
    case ValueKind::Nil:
    case ValueKind::DCont: return v;
    case ValueKind::Pair:
    case ValueKind::Cons:
    case ValueKind::Inl:
    case ValueKind::Inr: {
      auto a = subst(v->a, s);
      auto b = v->b ? subst(v->b, s) : nullptr;
      if (a == v->a && b == v->b) return v;
      auto out = std::make_shared<Value>(*v);
      out->a = std::move(a);
      out->b = std::move(b);
      return out;
    }
    case ValueKind::LinLam: {
      Sub storage;
      const Sub* inner = without(s, {&v->name}, storage);
      if (!inner) return v;
      auto body = subst(v->body, *inner);
      if (body == v->body) return v;
      auto out = std::make_shared<Value>(*v);
      out->body = std::move(body);
      return out;
    }
  }
  return v;
}

CompRef subst(const CompRef& e, const Sub& s) {
  if (!e || s.empty()) return e;
  Sub storage;
  std::shared_ptr<Comp> out;
  auto touch = [&]() -> Comp& {
    if (!out) out = clone(*e);
    return *out;
  };
  auto sv = [&](const ValueRef& v, ValueRef Comp::*field) {
    if (!v) return;
    auto nv = subst(v, s);
    if (nv != v) touch().*field = nv;
  };
  auto sc = [&](const CompRef& c, CompRef Comp::*field, const Sub* sub) {
    if (!c || !sub) return;
    auto nc = subst(c, *sub);
    if (nc != c) touch().*field = nc;
  };
  sv(e->v, &Comp::v);
  sv(e->w, &Comp::w);
  switch (e->kind) {
    case CompKind::Let:
      sc(e->e1, &Comp::e1, &s);
      sc(e->e2, &Comp::e2, without(s, {&e->x}, storage));
      break;
    case CompKind::CasePair: sc(e->e1, &Comp::e1, without(s, {&e->x, &e->y}, storage)); break;
    case CompKind::CaseSum: {
      Sub st2;
      sc(e->e1, &Comp::e1, without(s, {&e->x}, storage));
      sc(e->e2, &Comp::e2, without(s, {&e->y}, st2));
      break;
    }
    case CompKind::CaseList: {
      sc(e->e1, &Comp::e1, &s);
      sc(e->e2, &Comp::e2, without(s, {&e->x, &e->y}, storage));
      break;
    }
    case CompKind::Try: {
      sc(e->e1, &Comp::e1, &s);
      sc(e->e2, &Comp::e2, without(s, {&e->x}, storage));
      break;
    }
    case CompKind::Share: {
      // x is a use; y and z are binders.
      auto it = s.find(e->x);
      if (it != s.end()) {
        if (it->second->kind != ValueKind::Var) {
          // Sharing a closed value: both copies become that value.
          Sub inner = s;
          inner.erase(e->x);
          inner[e->y] = it->second;
          inner[e->z] = it->second;
          return subst(e->e1, inner);
        }
        touch().x = it->second->name;
      }
      sc(e->e1, &Comp::e1, without(s, {&e->y, &e->z}, storage));
      break;
    }
    case CompKind::Handle: {
      sc(e->e1, &Comp::e1, &s);
      sc(e->e2, &Comp::e2, without(s, {&e->y}, storage));
      bool changed = false;
      std::vector<HandlerBranch> bs = e->branches;
      for (auto& b : bs) {
        Sub st;
        const Sub* inner = without(s, {&b.x, &b.c}, st);
        if (!inner) continue;
        auto nb = subst(b.body, *inner);
        if (nb != b.body) {
          b.body = nb;
          changed = true;
        }
      }
      if (changed) touch().branches = std::move(bs);
      break;
    }
    default: break;
  }
  return out ? CompRef(out) : e;
}

// Free variables -------------------------------------------------------------

namespace {

void fvV(const ValueRef& v, std::set<std::string>& out);

void fvC(const CompRef& e, std::set<std::string>& out) {
  if (!e) return;
  auto bound = [&](const CompRef& c, std::initializer_list<std::string> names) {
    std::set<std::string> inner;
    fvC(c, inner);
    for (const auto& n : names) inner.erase(n);
    out.insert(inner.begin(), inner.end());
  };
  if (e->v) fvV(e->v, out);
  if (e->w) fvV(e->w, out);
  switch (e->kind) {
    case CompKind::Let:
      fvC(e->e1, out);
      bound(e->e2, {e->x});
      break;
    case CompKind::CasePair: bound(e->e1, {e->x, e->y}); break;
    case CompKind::CaseSum:
      bound(e->e1, {e->x});
      bound(e->e2, {e->y});
      break;
    case CompKind::CaseList:
      fvC(e->e1, out);
      bound(e->e2, {e->x, e->y});
      break;
    case CompKind::Try:
      fvC(e->e1, out);
      bound(e->e2, {e->x});
      break;
    case CompKind::Share:
      out.insert(e->x);
      bound(e->e1, {e->y, e->z});
      break;
    case CompKind::Handle:
      fvC(e->e1, out);
      bound(e->e2, {e->y});
      for (const auto& b : e->branches) bound(b.body, {b.x, b.c});
      break;
    default: break;
  }
}

void fvV(const ValueRef& v, std::set<std::string>& out) {
  if (!v) return;
  switch (v->kind) {
    case ValueKind::Var: out.insert(v->name); break;
    case ValueKind::Pair:
    case ValueKind::Cons:
      fvV(v->a, out);
      fvV(v->b, out);
      break;
    case ValueKind::Inl:
    case ValueKind::Inr: fvV(v->a, out); break;
    case ValueKind::LinLam: {
      std::set<std::string> inner;
      fvC(v->body, inner);
      inner.erase(v->name);
      out.insert(inner.begin(), inner.end());
      break;
    }
    default: break;
  }
}

}  // namespace

std::set<std::string> freeVars(const CompRef& e) {
  std::set<std::string> s;
  fvC(e, s);
  return s;
}
std::set<std::string> freeVars(const ValueRef& v) {
  std::set<std::string> s;
  fvV(v, s);
  return s;
}

// Printing -------------------------------------------------------------------

namespace {

const char* opName(PrimOp op) {
  switch (op) {
    case PrimOp::Add: return "+";
    case PrimOp::Sub: return "-";
    case PrimOp::Mul: return "*";
    case PrimOp::Lt: return "<";
    case PrimOp::Eq: return "==";
  }
  return "?";
}

bool properList(const ValueRef& v) {
  for (auto p = v; p; p = p->b) {
    if (p->kind == ValueKind::Nil) return true;
    if (p->kind != ValueKind::Cons) return false;
  }
  return false;
}

}  // namespace

std::string show(const ValueRef& v) {
  switch (v->kind) {
    case ValueKind::Var:
    case ValueKind::FunRef: return v->name;
    case ValueKind::Unit: return "()";
    case ValueKind::Int: return std::to_string(v->num);
    case ValueKind::Pair: return "(" + show(v->a) + ", " + show(v->b) + ")";
    case ValueKind::Inl: return "inl " + (v->a->kind == ValueKind::Pair || v->a->kind == ValueKind::Unit ? show(v->a) : "(" + show(v->a) + ")");
    case ValueKind::Inr: return "inr " + (v->a->kind == ValueKind::Pair || v->a->kind == ValueKind::Unit ? show(v->a) : "(" + show(v->a) + ")");
    case ValueKind::Nil: return "[]";
    case ValueKind::Cons: {
      if (properList(v)) {
        std::string s = "[";
        bool first = true;
        for (auto p = v; p->kind == ValueKind::Cons; p = p->b) {
          if (!first) s += ", ";
          first = false;
          s += show(p->a);
        }
        return s + "]";
      }
      return "(" + show(v->a) + " :: " + show(v->b) + ")";
    }
    case ValueKind::LinLam: return "(fn " + v->name + " -> " + show(v->body) + ")";
    case ValueKind::DCont: return "<dcont>";
  }
  return "?";
}

std::string show(const CompRef& e, int indent) {
  std::string pad(indent, ' ');
  std::string pad2(indent + 2, ' ');
  switch (e->kind) {
    case CompKind::Ret: return "ret " + show(e->v);
    case CompKind::Let:
      return "let " + e->x + " = " + show(e->e1, indent + 2) + " in\n" + pad + show(e->e2, indent);
    case CompKind::Tick: return "tick " + toString(e->amount);
    case CompKind::App: return show(e->v) + " " + show(e->w);
    case CompKind::LinApp: return show(e->v) + " @ " + show(e->w);
    case CompKind::CasePair:
      return "case " + show(e->v) + " of (" + e->x + ", " + e->y + ") ->\n" + pad2 + show(e->e1, indent + 2);
    case CompKind::CaseVoid: return "absurd " + show(e->v);
    case CompKind::CaseSum:
      return "case " + show(e->v) + " of\n" + pad + "| inl " + e->x + " -> " + show(e->e1, indent + 2) +
             "\n" + pad + "| inr " + e->y + " -> " + show(e->e2, indent + 2);
    case CompKind::CaseList:
      return "case " + show(e->v) + " of\n" + pad + "| [] -> " + show(e->e1, indent + 2) + "\n" + pad +
             "| " + e->x + " :: " + e->y + " -> " + show(e->e2, indent + 2);
    case CompKind::Do: return "do " + e->label + " " + show(e->v);
    case CompKind::Prim: return show(e->v) + " " + opName(e->op) + " " + show(e->w);
    case CompKind::Raise: return "raise " + show(e->v);
    case CompKind::Try:
      return "try " + show(e->e1, indent + 2) + "\n" + pad + "catch " + e->x + " -> " + show(e->e2, indent + 2);
    case CompKind::Share:
      return "share " + e->x + " as " + e->y + ", " + e->z + " in\n" + pad + show(e->e1, indent);
    case CompKind::Handle: {
      std::string s = "handle " + show(e->e1, indent + 2) + " {\n" + pad2 + "return " + e->y + " -> " +
                      show(e->e2, indent + 4);
      for (const auto& b : e->branches)
        s += "\n" + pad + "| " + b.label + " " + b.x + " " + b.c + " -> " + show(b.body, indent + 4);
      return s + "\n" + pad + "}";
    }
  }
  return "?";
}

std::string show(const CoreProgram& p) {
  std::ostringstream os;
  for (const auto& e : p.effects)
    os << "effect " << e.label << " : " << show(e.input) << " => " << show(e.output) << ";\n";
  for (const auto& f : p.funs) {
    os << "fun " << f.name << " (" << f.param << ": " << show(f.paramType) << "): " << show(f.resultType);
    if (!f.effects.empty()) {
      os << " / {";
      bool first = true;
      for (const auto& l : f.effects) {
        os << (first ? "" : ", ") << l;
        first = false;
      }
      os << "}";
    }
    os << " =\n  " << show(f.body, 2) << ";\n";
  }
  if (p.main) os << "main =\n  " << show(p.main, 2) << ";\n";
  return os.str();
}

bool sameValue(const ValueRef& a, const ValueRef& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ValueKind::Unit:
    case ValueKind::Nil: return true;
    case ValueKind::Int: return a->num == b->num;
    case ValueKind::Var:
    case ValueKind::FunRef: return a->name == b->name;
    case ValueKind::Pair:
    case ValueKind::Cons: return sameValue(a->a, b->a) && sameValue(a->b, b->b);
    case ValueKind::Inl:
    case ValueKind::Inr: return sameValue(a->a, b->a);
    case ValueKind::LinLam: return a->body == b->body && a->name == b->name;
    case ValueKind::DCont: return a->cont == b->cont;
  }
  return false;
}

}  // namespace aara
