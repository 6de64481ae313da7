#pragma once

#include <functional>

#include "aara/syntax.hpp"

namespace aara::testing {

inline void visit(const CompRef& e, const std::function<void(const Comp&)>& f);

inline void visitValue(const ValueRef& v, const std::function<void(const Comp&)>& f) {
  if (!v) return;
  if (v->body) visit(v->body, f);
  visitValue(v->a, f);
  visitValue(v->b, f);
}

inline void visit(const CompRef& e, const std::function<void(const Comp&)>& f) {
  if (!e) return;
  f(*e);
  visitValue(e->v, f);
  visitValue(e->w, f);
  visit(e->e1, f);
  visit(e->e2, f);
  for (const auto& b : e->branches) visit(b.body, f);
}

inline int count(const CompRef& e, CompKind k) {
  int n = 0;
  visit(e, [&](const Comp& c) { n += c.kind == k; });
  return n;
}

inline int count(const CoreProgram& p, CompKind k) {
  int n = 0;
  for (const auto& f : p.funs) n += count(f.body, k);
  return n + count(p.main, k);
}

}  // namespace aara::testing
