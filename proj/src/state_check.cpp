#include <algorithm>

#include "aara/machine.hpp"

namespace aara::machine {

STypeRef typeOfValue(const ValueRef& v) {
  if (v->kind == ValueKind::Pair) return sProd(typeOfValue(v->a), typeOfValue(v->b));
  return v->type;
}

std::optional<std::string> checkSegment(const std::vector<Frame>& frames, const STypeRef& out,
                                        const EffectSet& outEffects, SegmentType* result) {
  STypeRef expect = out;
  EffectSet eff = outEffects;
  for (size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    const std::string where = "frame " + std::to_string(i);
    if (f.kind == Frame::Kind::Bind) {
      if (expect && !sameType(f.body->type, expect))
        return where + " (" + f.x + ".e) produces " + show(f.body->type) + " but " + show(expect) +
               " is expected below it";
      expect = f.xType;
      continue;
    }
    const Comp& h = *f.body;
    if (expect && !sameType(h.type, expect))
      return where + " (handler) produces " + show(h.type) + " but " + show(expect) +
             " is expected below it";
    if (!std::includes(eff.begin(), eff.end(), h.outer.begin(), h.outer.end()))
      return where + " (handler) may perform effects not handled below it";
    expect = h.xType;
    eff.clear();
    for (const auto& b : h.branches) eff.insert(b.label);
  }
  if (result) *result = {expect, eff};
  return std::nullopt;
}

namespace {

std::optional<std::string> checkCont(const ValueRef& v) {
  if (!v) return std::nullopt;
  switch (v->kind) {
    case ValueKind::DCont: {
      const auto& cell = *v->cont;
      if (cell.frames.empty() || cell.frames.front().kind != Frame::Kind::Handler)
        return "continuation does not start with its handler";
      const Comp& h = *cell.frames.front().body;
      SegmentType st;
      if (auto bad = checkSegment(cell.frames, h.type, h.outer, &st)) return "inside continuation: " + *bad;
      if (cell.type && st.accepts && !sameType(cell.type->a, st.accepts))
        return "continuation resumes with " + show(cell.type->a) + " but its frames accept " +
               show(st.accepts);
      return std::nullopt;
    }
    case ValueKind::Pair:
    case ValueKind::Cons:
    case ValueKind::Inl:
    case ValueKind::Inr: {
      if (auto bad = checkCont(v->a)) return bad;
      return checkCont(v->b);
    }
    default: return std::nullopt;
  }
}

bool subset(const EffectSet& a, const EffectSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::optional<std::string> checkStateStructure(const State& s, const CoreProgram& p) {
  SegmentType st;
  if (auto bad = checkSegment(s.stack, nullptr, s.ambient, &st)) return "stack: " + *bad;
  switch (s.focus) {
    case Focus::Eval: {
      const Comp& e = *s.comp;
      if (st.accepts && !sameType(e.type, st.accepts))
        return "computation of type " + show(e.type) + " meets a stack expecting " + show(st.accepts);
      if (e.kind == CompKind::Do && !st.effects.count(e.label))
        return "operation '" + e.label + "' is not handled by the stack";
      if ((e.kind == CompKind::App || e.kind == CompKind::LinApp) && e.v->type &&
          !subset(e.v->type->effects, st.effects))
        return "callee may perform effects the stack does not handle";
      if (auto bad = checkCont(e.v)) return bad;
      return checkCont(e.w);
    }
    case Focus::Return: {
      STypeRef t = typeOfValue(s.value);
      if (st.accepts && !sameType(t, st.accepts))
        return "value of type " + show(t) + " returned to a stack expecting " + show(st.accepts);
      return checkCont(s.value);
    }
    case Focus::Propagate: {
      const EffectDecl* d = p.findEffect(s.label);
      if (!d) return "unknown operation '" + s.label + "'";
      if (!sameType(typeOfValue(s.value), d->input))
        return "payload of '" + s.label + "' has type " + show(typeOfValue(s.value));
      std::vector<Frame> seg(s.captured.begin(), s.captured.end());
      SegmentType cs;
      if (auto bad = checkSegment(seg, st.accepts, st.effects, &cs)) return "captured: " + *bad;
      if (!seg.empty()) {
        if (cs.accepts && !sameType(cs.accepts, d->output))
          return "captured frames accept " + show(cs.accepts) + " but '" + s.label + "' resumes with " +
                 show(d->output);
        if (!cs.effects.count(s.label)) return "operation '" + s.label + "' escapes its handlers";
      } else if (!st.effects.count(s.label)) {
        return "operation '" + s.label + "' is not handled by the stack";
      }
      return checkCont(s.value);
    }
  }
  return std::nullopt;
}

}  // namespace aara::machine
