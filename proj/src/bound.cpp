#include <chrono>

#include "aara/analysis.hpp"
#include "aara/errors.hpp"

namespace aara::analysis {

namespace {

void weigh(const VType& t, const Rat& mult, lp::Objective& obj) {
  switch (t->kind) {
    case TypeKind::Prod:
      weigh(t->fst, mult, obj);
      weigh(t->snd, mult, obj);
      break;
    case TypeKind::Sum:
      for (const auto& a : t->anns) {
        obj.add(a.pot, mult);
        weigh(a.type, mult, obj);
      }
      break;
    case TypeKind::List: {
      Rat inner = mult * 64;
      obj.add(t->anns[0].pot, inner);
      weigh(t->anns[0].type, inner, obj);
      break;
    }
    default: break;
  }
}

}  // namespace

lp::Objective entryObjective(const Template& t) {
  lp::Objective obj;
  weigh(t.arrow.arg.type, 1, obj);
  obj.add(t.arrow.arg.pot, 1);
  obj.add(t.arrow.result.pot, 1);
  for (const auto& e : t.arrow.effects.entries) {
    obj.add(e.input.pot, 1);
    obj.add(e.output.pot, 1);
    weigh(e.input.type, 1, obj);
    weigh(e.output.type, 1, obj);
  }
  return obj;
}

std::string AnalysisResult::signatureText() const {
  if (status != Status::Bounded) return "";
  return show(signature, false);
}

// Bound polynomial ------------------------------------------------------------

namespace {

std::string pathName(const std::string& root, const std::vector<PathStep>& path) {
  static const char* idx[] = {"i", "j", "k", "l", "m", "n"};
  std::string s = root;
  int depth = 0;
  for (auto st : path) {
    switch (st) {
      case PathStep::Fst: s += ".1"; break;
      case PathStep::Snd: s += ".2"; break;
      case PathStep::Elems: s += std::string("[") + idx[std::min(depth++, 5)] + "]"; break;
      case PathStep::InlPayload: s += ".inl"; break;
      case PathStep::InrPayload: s += ".inr"; break;
    }
  }
  return s;
}

bool hasElems(const std::vector<PathStep>& path) {
  for (auto s : path)
    if (s == PathStep::Elems) return true;
  return false;
}

void collectTerms(const TypeRef& t, const std::string& root, std::vector<PathStep>& path,
                  std::vector<BoundTerm>& out) {
  auto push = [&](BoundTerm::Kind k, const Rat& c) {
    if (c == 0) return;
    BoundTerm term;
    term.kind = k;
    term.path = path;
    term.coeff = c;
    std::string p = pathName(root, path);
    switch (k) {
      case BoundTerm::Kind::Length: term.name = (hasElems(path) ? "sum|" : "|") + p + "|"; break;
      case BoundTerm::Kind::Inl: term.name = "#inl(" + p + ")"; break;
      case BoundTerm::Kind::Inr: term.name = "#inr(" + p + ")"; break;
    }
    out.push_back(std::move(term));
  };
  auto descend = [&](PathStep s, const TypeRef& sub) {
    path.push_back(s);
    collectTerms(sub, root, path, out);
    path.pop_back();
  };
  switch (t->kind) {
    case TypeKind::Prod:
      descend(PathStep::Fst, t->fst);
      descend(PathStep::Snd, t->snd);
      break;
    case TypeKind::Sum:
      push(BoundTerm::Kind::Inl, t->anns[0].pot);
      push(BoundTerm::Kind::Inr, t->anns[1].pot);
      descend(PathStep::InlPayload, t->anns[0].type);
      descend(PathStep::InrPayload, t->anns[1].type);
      break;
    case TypeKind::List:
      push(BoundTerm::Kind::Length, t->anns[0].pot);
      descend(PathStep::Elems, t->anns[0].type);
      break;
    default: break;
  }
}

void at(const ValueRef& v, const std::vector<PathStep>& path, size_t i, std::vector<ValueRef>& out) {
  if (i == path.size()) {
    out.push_back(v);
    return;
  }
  auto bad = [&]() {
    return Error(ErrorKind::StructuralMismatch, "value " + show(v) + " does not fit the bound's path");
  };
  switch (path[i]) {
    case PathStep::Fst:
    case PathStep::Snd:
      if (v->kind != ValueKind::Pair) throw bad();
      at(path[i] == PathStep::Fst ? v->a : v->b, path, i + 1, out);
      return;
    case PathStep::Elems:
      for (ValueRef c = v; c->kind != ValueKind::Nil; c = c->b) {
        if (c->kind != ValueKind::Cons) throw bad();
        at(c->a, path, i + 1, out);
      }
      return;
    case PathStep::InlPayload:
      if (v->kind == ValueKind::Inl) at(v->a, path, i + 1, out);
      else if (v->kind != ValueKind::Inr) throw bad();
      return;
    case PathStep::InrPayload:
      if (v->kind == ValueKind::Inr) at(v->a, path, i + 1, out);
      else if (v->kind != ValueKind::Inl) throw bad();
      return;
  }
}

}  // namespace

BoundPolynomial boundOf(const Arrow& sig, const std::string& param) {
  BoundPolynomial b;
  b.constant = sig.arg.pot;
  std::vector<PathStep> path;
  collectTerms(sig.arg.type, param, path, b.terms);
  return b;
}

std::string BoundPolynomial::pretty() const {
  std::string s;
  auto sep = [&]() {
    if (!s.empty()) s += " + ";
  };
  if (constant != 0 || terms.empty()) s = toString(constant);
  for (const auto& t : terms) {
    sep();
    s += t.coeff == 1 ? t.name : toString(t.coeff) + "*" + t.name;
  }
  return s;
}

Rat measure(const BoundTerm& t, const ValueRef& v) {
  std::vector<ValueRef> found;
  at(v, t.path, 0, found);
  Rat n = 0;
  for (const auto& x : found) {
    switch (t.kind) {
      case BoundTerm::Kind::Length:
        for (ValueRef c = x; c->kind != ValueKind::Nil; c = c->b) {
          if (c->kind != ValueKind::Cons)
            throw Error(ErrorKind::StructuralMismatch, "expected a list, found " + show(x));
          n += 1;
        }
        break;
      case BoundTerm::Kind::Inl:
        if (x->kind == ValueKind::Inl) n += 1;
        break;
      case BoundTerm::Kind::Inr:
        if (x->kind == ValueKind::Inr) n += 1;
        break;
    }
  }
  return n;
}

Rat evalBound(const BoundPolynomial& b, const ValueRef& v) {
  Rat r = b.constant;
  for (const auto& t : b.terms) r += t.coeff * measure(t, v);
  return r;
}

// Inference -------------------------------------------------------------------

AnalysisResult inferBound(const CoreProgram& p, const std::string& entry) {
  auto start = std::chrono::steady_clock::now();
  ConstraintSet cs = genConstraints(p);
  AnalysisResult r = inferBound(cs, p, entry);
  r.elapsedMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

AnalysisResult inferBound(const ConstraintSet& cs, const CoreProgram& p, const std::string& entry) {
  auto start = std::chrono::steady_clock::now();
  const FunDecl* f = p.findFun(entry);
  auto it = cs.templates.find(entry);
  if (!f || it == cs.templates.end()) throw Error(ErrorKind::Scope, "no function named '" + entry + "'");
  const Template& t = it->second;

  lp::System sub;
  for (size_t v = 0; v < cs.sys.numVars(); ++v) sub.newVar(cs.sys.tag(static_cast<lp::Var>(v)));
  for (size_t i = t.c0; i < t.c1; ++i) {
    const auto& c = cs.sys.constraints()[i];
    if (c.rel == lp::Rel::Ge) sub.addGe(c.lhs, c.tag);
    else sub.addEq(c.lhs, c.tag);
  }

  AnalysisResult r;
  r.entry = entry;
  r.objective = entryObjective(t);
  r.lp.vars = static_cast<size_t>(t.v1 - t.v0);
  r.lp.constraints = t.c1 - t.c0;
  lp::SolveResult sol = lp::solve(sub, r.objective);
  r.lp.pivots = sol.pivots;
  if (sol.status == lp::SolveResult::Status::Optimal) {
    r.status = Status::Bounded;
    for (lp::Var v = t.v0; v < t.v1; ++v) r.assignment[v] = sol.values.at(v);
    r.signature = mapPots<Rat>(t.arrow, [&](const lp::Var& v) { return r.assignment.at(v); });
    r.bound = boundOf(r.signature, f->param);
  }
  r.elapsedMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

CertificateResult checkCertificate(const CoreProgram& p, const std::string& entry, const lp::Assignment& a) {
  ConstraintSet cs = genConstraints(p);
  auto it = cs.templates.find(entry);
  if (it == cs.templates.end()) throw Error(ErrorKind::Scope, "no function named '" + entry + "'");
  const Template& t = it->second;
  for (lp::Var v = t.v0; v < t.v1; ++v) {
    auto f = a.find(v);
    if (f == a.end() || f->second < 0)
      return {false, t.c1 - t.c0, "nonnegativity of " + cs.sys.tag(v)};
  }
  for (size_t i = t.c0; i < t.c1; ++i) {
    const auto& c = cs.sys.constraints()[i];
    if (!lp::satisfies(c, a)) return {false, i - t.c0, c.tag};
  }
  return {};
}

}  // namespace aara::analysis
