#include "aara/machine.hpp"

#include <cstdlib>
#include <ostream>

#include "aara/errors.hpp"

namespace aara::machine {

const char* stuckName(StuckReason r) {
  switch (r) {
    case StuckReason::OneShotViolation: return "OneShotViolation";
    case StuckReason::UnhandledPrimitive: return "UnhandledPrimitive";
    case StuckReason::StepLimit: return "StepLimit";
  }
  return "?";
}

State initState(const CompRef& e, const Mode& m) {
  auto fv = freeVars(e);
  if (!fv.empty()) throw Error(ErrorKind::OpenTerm, "initial computation mentions '" + *fv.begin() + "'");
  State s;
  s.focus = Focus::Eval;
  s.comp = e;
  s.metered = !m.profile;
  s.resource = m.profile ? Rat(0) : m.budget;
  return s;
}

namespace {

StepResult next(const char* rule) { return {StepResult::Kind::Next, rule, {}, {}}; }

StepResult stuck(StuckReason r, std::string detail) {
  return {StepResult::Kind::Stuck, "stuck", r, std::move(detail)};
}

void eval(State& s, CompRef e) {
  s.focus = Focus::Eval;
  s.comp = std::move(e);
  s.value = nullptr;
}

void ret(State& s, ValueRef v) {
  s.focus = Focus::Return;
  s.value = std::move(v);
  s.comp = nullptr;
}

ValueRef boolean(bool b) { return b ? vInl(vUnit(), sBool()) : vInr(vUnit(), sBool()); }

std::int64_t wrap(std::uint64_t x) { return static_cast<std::int64_t>(x); }

StepResult evalStep(State& s, const CoreProgram& p) {
  const Comp& e = *s.comp;
  auto sub1 = [](const CompRef& body, const std::string& x, const ValueRef& v) {
    return subst(body, {{x, v}});
  };
  switch (e.kind) {
    case CompKind::Ret:
      ret(s, e.v);
      return next("D-ret");
    case CompKind::Let:
      s.stack.push_back({Frame::Kind::Bind, e.x, e.xType, e.e2});
      eval(s, e.e1);
      return next("D-let");
    case CompKind::Tick: {
      const Rat& q = e.amount;
      if (s.metered) {
        if (s.resource < q) return {StepResult::Kind::Exhausted, "D-tick", {}, {}};
        s.resource -= q;
      }
      s.net += q;
      if (s.net > s.highWater) s.highWater = s.net;
      ret(s, vUnit());
      return next("D-tick");
    }
    case CompKind::App: {
      if (e.v->kind != ValueKind::FunRef) return stuck(StuckReason::UnhandledPrimitive, "applying a non-function");
      const FunDecl* f = p.findFun(e.v->name);
      if (!f) return stuck(StuckReason::UnhandledPrimitive, "unknown function '" + e.v->name + "'");
      eval(s, sub1(f->body, f->param, e.w));
      return next("D-fun");
    }
    case CompKind::LinApp: {
      if (e.v->kind == ValueKind::LinLam) {
        eval(s, sub1(e.v->body, e.v->name, e.w));
        return next("D-linfun");
      }
      if (e.v->kind == ValueKind::DCont) {
        auto& cell = *e.v->cont;
        if (cell.used) return stuck(StuckReason::OneShotViolation, "continuation resumed twice");
        cell.used = true;
        for (const auto& f : cell.frames) s.stack.push_back(f);
        ret(s, e.w);
        return next("D-dcont");
      }
      return stuck(StuckReason::UnhandledPrimitive, "linear application of a non-function");
    }
    case CompKind::CasePair:
      if (e.v->kind != ValueKind::Pair) return stuck(StuckReason::UnhandledPrimitive, "pair case on " + show(e.v));
      eval(s, subst(e.e1, {{e.x, e.v->a}, {e.y, e.v->b}}));
      return next("D-pair");
    case CompKind::CaseSum:
      if (e.v->kind == ValueKind::Inl) {
        eval(s, sub1(e.e1, e.x, e.v->a));
        return next("D-inl");
      }
      if (e.v->kind == ValueKind::Inr) {
        eval(s, sub1(e.e2, e.y, e.v->a));
        return next("D-inr");
      }
      return stuck(StuckReason::UnhandledPrimitive, "sum case on " + show(e.v));
    case CompKind::CaseList:
      if (e.v->kind == ValueKind::Nil) {
        eval(s, e.e1);
        return next("D-nil");
      }
      if (e.v->kind == ValueKind::Cons) {
        eval(s, subst(e.e2, {{e.x, e.v->a}, {e.y, e.v->b}}));
        return next("D-cons");
      }
      return stuck(StuckReason::UnhandledPrimitive, "list case on " + show(e.v));
    case CompKind::CaseVoid: return stuck(StuckReason::UnhandledPrimitive, "case on a value of type void");
    case CompKind::Do:
      s.focus = Focus::Propagate;
      s.label = e.label;
      s.value = e.v;
      s.captured.clear();
      s.comp = nullptr;
      return next("D-do");
    case CompKind::Handle:
      s.stack.push_back({Frame::Kind::Handler, {}, nullptr, s.comp});
      eval(s, e.e1);
      return next("D-try");
    case CompKind::Prim: {
      if (e.v->kind != ValueKind::Int || e.w->kind != ValueKind::Int)
        return stuck(StuckReason::UnhandledPrimitive, "arithmetic on non-integers");
      auto a = static_cast<std::uint64_t>(e.v->num);
      auto b = static_cast<std::uint64_t>(e.w->num);
      switch (e.op) {
        case PrimOp::Add: ret(s, vInt(wrap(a + b))); break;
        case PrimOp::Sub: ret(s, vInt(wrap(a - b))); break;
        case PrimOp::Mul: ret(s, vInt(wrap(a * b))); break;
        case PrimOp::Lt: ret(s, boolean(e.v->num < e.w->num)); break;
        case PrimOp::Eq: ret(s, boolean(e.v->num == e.w->num)); break;
      }
      return next("D-prim");
    }
    case CompKind::Share:
    case CompKind::Raise:
    case CompKind::Try: break;
  }
  return stuck(StuckReason::UnhandledPrimitive, "no rule for this computation");
}

const HandlerBranch* findBranch(const Comp& h, const std::string& label) {
  for (const auto& b : h.branches)
    if (b.label == label) return &b;
  return nullptr;
}

}  // namespace

StepResult step(State& s, const CoreProgram& p) {
  switch (s.focus) {
    case Focus::Eval: return evalStep(s, p);
    case Focus::Return: {
      if (s.stack.empty()) return {StepResult::Kind::Final, "final", {}, {}};
      Frame f = std::move(s.stack.back());
      s.stack.pop_back();
      if (f.kind == Frame::Kind::Bind) {
        eval(s, subst(f.body, {{f.x, s.value}}));
        return next("D-seq");
      }
      eval(s, subst(f.body->e2, {{f.body->y, s.value}}));
      return next("D-normal");
    }
    case Focus::Propagate: {
      if (s.stack.empty()) return {StepResult::Kind::Final, "final-exn", {}, {}};
      Frame f = std::move(s.stack.back());
      s.stack.pop_back();
      const HandlerBranch* b =
          f.kind == Frame::Kind::Handler ? findBranch(*f.body, s.label) : nullptr;
      if (!b) {
        s.captured.push_front(std::move(f));
        return next("D-capture");
      }
      const EffectDecl* d = p.findEffect(s.label);
      auto cell = std::make_shared<ContCell>();
      cell->frames.push_back(f);
      for (auto& c : s.captured) cell->frames.push_back(std::move(c));
      s.captured.clear();
      cell->type = sLinFun(d ? d->output : sUnit(), f.body->type, f.body->outer);
      auto k = vDCont(cell);
      eval(s, subst(b->body, {{b->x, s.value}, {b->c, k}}));
      return next("D-handle");
    }
  }
  return stuck(StuckReason::UnhandledPrimitive, "bad focus");
}

std::uint64_t defaultStepLimit() {
  if (const char* env = std::getenv("AARA_FX_STEP_LIMIT")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 10'000'000ULL;
}

Outcome run(const CoreProgram& p, const CompRef& e, const Mode& m, const RunOptions& opts) {
  State s = initState(e, m);
  if (opts.ambient) s.ambient = *opts.ambient;
  std::uint64_t limit = opts.stepLimit ? opts.stepLimit : defaultStepLimit();
  Outcome out;
  auto finish = [&](Outcome& o) {
    o.net = s.net;
    o.highWater = s.highWater;
    o.remaining = s.resource;
  };
  auto check = [&]() {
    if (!opts.checkStructure) return;
    if (auto v = checkStateStructure(s, p)) {
      if (out.structuralViolations++ == 0) out.firstViolation = "step " + std::to_string(out.steps) + ": " + *v;
    }
  };
  check();
  for (;;) {
    if (out.steps >= limit) {
      out.kind = OutcomeKind::RuntimeError;
      out.stuck = StuckReason::StepLimit;
      out.detail = "step limit " + std::to_string(limit) + " reached";
      finish(out);
      return out;
    }
    StepResult r = step(s, p);
    switch (r.kind) {
      case StepResult::Kind::Final:
        if (s.focus == Focus::Return) {
          out.kind = OutcomeKind::Value;
          out.value = s.value;
        } else {
          out.kind = OutcomeKind::UnhandledEffect;
          out.label = s.label;
          out.value = s.value;
        }
        finish(out);
        return out;
      case StepResult::Kind::Exhausted:
        out.kind = OutcomeKind::ResourceExhausted;
        out.exhaustedAt = out.steps;
        finish(out);
        return out;
      case StepResult::Kind::Stuck:
        out.kind = OutcomeKind::RuntimeError;
        out.stuck = r.reason;
        out.detail = r.detail;
        finish(out);
        return out;
      case StepResult::Kind::Next: break;
    }
    ++out.steps;
    if (opts.trace)
      *opts.trace << out.steps << "," << r.rule << "," << toString(s.metered ? s.resource : s.net) << ","
                  << s.stack.size() << "\n";
    check();
    if (opts.observe) opts.observe(s);
  }
}

Outcome runEntry(const CoreProgram& p, const std::string& entry, const ValueRef& arg, const Mode& m,
                 const RunOptions& opts) {
  const FunDecl* f = p.findFun(entry);
  if (!f) throw Error(ErrorKind::Scope, "no function named '" + entry + "'");
  auto fref = vFunRef(f->name, sFun(f->paramType, f->resultType, f->effects));
  RunOptions o = opts;
  if (!o.ambient) o.ambient = f->effects;
  return run(p, cApp(fref, arg, f->resultType), m, o);
}

}  // namespace aara::machine
