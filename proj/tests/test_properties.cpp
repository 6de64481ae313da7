#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <variant>

#include "aara/analysis.hpp"
#include "aara/driver.hpp"
#include "aara/elaborate.hpp"
#include "aara/errors.hpp"
#include "aara/machine.hpp"
#include "aara/potential.hpp"
#include "aara/surface.hpp"

using namespace aara;
using driver::SplitMix64;

namespace {

std::string corpus(const std::string& name) { return std::string(AARA_CORPUS_DIR) + "/" + name + ".fx"; }

STypeRef randomSType(SplitMix64& rng, int depth) {
  switch (depth <= 0 ? rng.below(2) : rng.below(6)) {
    case 0: return sUnit();
    case 1: return sInt();
    case 2: return sProd(randomSType(rng, depth - 1), randomSType(rng, depth - 1));
    case 3: return sSum(randomSType(rng, depth - 1), randomSType(rng, depth - 1));
    default: return sList(randomSType(rng, depth - 1));
  }
}

/// Reference big-step evaluator for the pure integer/list fragment of the
/// surface language: ints, lists of ints, let, match on lists, arithmetic
/// and calls to top-level functions.
struct RefEval {
  using V = std::variant<std::int64_t, std::vector<std::int64_t>>;
  const surface::SurfaceProgram& prog;
  Rat cost = 0;

  V eval(const surface::ExprRef& e, std::map<std::string, V> env) {
    using surface::ExprKind;
    switch (e->kind) {
      case ExprKind::Int: return e->num;
      case ExprKind::Var: return env.at(e->name);
      case ExprKind::Nil: return std::vector<std::int64_t>{};
      case ExprKind::Cons: {
        auto h = std::get<std::int64_t>(eval(e->a, env));
        auto t = std::get<std::vector<std::int64_t>>(eval(e->b, env));
        t.insert(t.begin(), h);
        return t;
      }
      case ExprKind::Tick: cost += e->amount; return std::int64_t{0};
      case ExprKind::Binop: {
        auto a = std::get<std::int64_t>(eval(e->a, env));
        auto b = std::get<std::int64_t>(eval(e->b, env));
        switch (e->op) {
          case PrimOp::Add: return a + b;
          case PrimOp::Sub: return a - b;
          case PrimOp::Mul: return a * b;
          default: throw std::logic_error("comparison outside the fragment");
        }
      }
      case ExprKind::Let: {
        V x = eval(e->a, env);
        env[e->name] = x;
        return eval(e->b, env);
      }
      case ExprKind::MatchList: {
        auto l = std::get<std::vector<std::int64_t>>(eval(e->a, env));
        if (l.empty()) return eval(e->b, env);
        env[e->x] = l.front();
        env[e->y] = std::vector<std::int64_t>(l.begin() + 1, l.end());
        return eval(e->c, env);
      }
      case ExprKind::App: {
        V arg = eval(e->b, env);
        for (const auto& f : prog.funs)
          if (f.name == e->a->name) return eval(f.body, {{f.param, arg}});
        throw std::logic_error("unknown function");
      }
      default: throw std::logic_error("expression outside the fragment");
    }
  }
};

/// Random fully parenthesised integer expression over the given scope.
struct ProgramGen {
  SplitMix64& rng;
  int fresh = 0;

  std::string expr(int depth, std::vector<std::string> ints, std::vector<std::string> lists) {
    std::uint64_t pick = depth <= 0 ? rng.below(2) : rng.below(8);
    switch (pick) {
      case 0: return std::to_string(rng.range(0, 5));
      case 1:
        if (ints.empty()) return std::to_string(rng.range(0, 5));
        return ints[rng.below(ints.size())];
      case 2: {
        static const char* ops[] = {"+", "-", "*"};
        return "(" + expr(depth - 1, ints, lists) + " " + ops[rng.below(3)] + " " + expr(depth - 1, ints, lists) + ")";
      }
      case 3: {
        std::string v = "v" + std::to_string(fresh++);
        std::string bound = expr(depth - 1, ints, lists);
        ints.push_back(v);
        return "(let " + v + " = " + bound + " in " + expr(depth - 1, ints, lists) + ")";
      }
      case 4: return "(g " + expr(depth - 1, ints, lists) + ")";
      case 5: return "(let _ = tick 1 in " + expr(depth - 1, ints, lists) + ")";
      case 6: return "(len (" + expr(depth - 1, ints, lists) + " :: " + lists[rng.below(lists.size())] + "))";
      default: {
        std::string h = "h" + std::to_string(fresh), t = "t" + std::to_string(fresh);
        ++fresh;
        std::string scrut = lists[rng.below(lists.size())];
        std::string nil = expr(depth - 1, ints, lists);
        ints.push_back(h);
        lists.push_back(t);
        return "(match " + scrut + " { [] -> " + nil + " | " + h + " :: " + t + " -> " + expr(depth - 1, ints, lists) + " })";
      }
    }
  }
};

}  // namespace

TEST_CASE("potential is additive in the annotations") {
  SplitMix64 rng(7);
  CoreProgram empty;
  for (int i = 0; i < 200; ++i) {
    STypeRef s = randomSType(rng, 3);
    ValueRef v = driver::randomValue(s, rng, empty, {6, -3, 3, false});
    Rat a(static_cast<long>(rng.below(7)), 2), b(static_cast<long>(rng.below(5)), 3);
    CAPTURE(show(s));
    CAPTURE(show(v));
    CHECK(potential(v, annotateUniform(s, a + b)) ==
          potential(v, annotateUniform(s, a)) + potential(v, annotateUniform(s, b)));
  }
}

TEST_CASE("the bound polynomial is the potential of the argument plus p") {
  int checked = 0;
  for (const auto& g : driver::loadCorpus(AARA_CORPUS_DIR)) {
    if (g.status != "bounded") continue;
    auto a = driver::analyzeEntry(g.programFile, g.entry);
    REQUIRE(a.result);
    const FunDecl* f = a.program.findFun(g.entry);
    SplitMix64 rng(99);
    for (int i = 0; i < 25; ++i) {
      ValueRef v = driver::randomValue(f->paramType, rng, a.program, {8});
      CHECK(analysis::evalBound(a.result->bound, v) ==
            potential(v, a.result->signature.arg) + a.result->signature.arg.pot);
      ++checked;
    }
  }
  CHECK(checked >= 250);
}

TEST_CASE("runs are deterministic and the high water mark is the least budget") {
  for (const auto& g : driver::loadCorpus(AARA_CORPUS_DIR)) {
    if (g.status != "bounded") continue;
    auto p = driver::loadProgram(g.programFile);
    const FunDecl* f = p.findFun(g.entry);
    SplitMix64 rng(3);
    for (int i = 0; i < 10; ++i) {
      ValueRef v = driver::randomValue(f->paramType, rng, p, {6});
      CAPTURE(g.name);
      CAPTURE(show(v));
      auto o1 = machine::runEntry(p, g.entry, v, machine::Mode::profiling());
      auto o2 = machine::runEntry(p, g.entry, v, machine::Mode::profiling());
      CHECK(o1.kind == o2.kind);
      CHECK(o1.steps == o2.steps);
      CHECK(o1.net == o2.net);
      CHECK(o1.highWater == o2.highWater);
      if (o1.value && o2.value) CHECK(sameValue(o1.value, o2.value));
      if (o1.kind == machine::OutcomeKind::RuntimeError) continue;
      auto enough = machine::runEntry(p, g.entry, v, machine::Mode::metered(o1.highWater));
      CHECK(enough.kind == o1.kind);
      CHECK(enough.remaining == o1.highWater - o1.net);
      if (o1.highWater > 0) {
        auto shy = machine::runEntry(p, g.entry, v, machine::Mode::metered(o1.highWater - Rat(1, 100)));
        CHECK(shy.kind == machine::OutcomeKind::ResourceExhausted);
      }
    }
  }
}

TEST_CASE("serial and parallel verification agree") {
  for (const char* name : {"sqdist", "store_lists", "generator_to_list", "zip_eff"}) {
    auto g = driver::parseGolden(driver::readFile(corpus(name).substr(0, corpus(name).size() - 3) + ".golden"), name);
    auto a = driver::analyzeEntry(corpus(name), g.entry);
    REQUIRE(a.result);
    driver::VerifyOptions o;
    o.trials = 40;
    o.tightFamily = g.tightFamily;
    o.checkStructure = true;
    auto s = driver::verifySerial(a.program, *a.result, o);
    auto p = driver::verifyParallel(a.program, *a.result, o);
    CAPTURE(name);
    REQUIRE(s.records.size() == p.records.size());
    CHECK(s.minSlack == p.minSlack);
    CHECK(s.violations() == 0);
    for (size_t i = 0; i < s.records.size(); ++i) {
      CHECK(sameValue(s.records[i].input, p.records[i].input));
      CHECK(s.records[i].highWater == p.records[i].highWater);
      CHECK(s.records[i].net == p.records[i].net);
      CHECK(s.records[i].bound == p.records[i].bound);
    }
  }
}

TEST_CASE("stacks compose: checking a split stack agrees with checking it whole") {
  int splits = 0;
  for (const char* name : {"store_lists", "generator_to_list", "prefix_sum_list", "zip_eff", "nearest"}) {
    auto g = driver::parseGolden(driver::readFile(std::string(AARA_CORPUS_DIR) + "/" + name + ".golden"), name);
    auto p = driver::loadProgram(corpus(name));
    const FunDecl* f = p.findFun(g.entry);
    SplitMix64 rng(11);
    std::vector<std::vector<Frame>> stacks;
    machine::RunOptions opts;
    opts.observe = [&](const machine::State& s) {
      if (s.stack.size() >= 2 && stacks.size() < 400 && rng.below(3) == 0) stacks.push_back(s.stack);
    };
    for (int i = 0; i < 5; ++i)
      machine::runEntry(p, g.entry, driver::randomValue(f->paramType, rng, p, {5}), machine::Mode::profiling(), opts);
    for (const auto& st : stacks) {
      machine::SegmentType whole;
      REQUIRE_FALSE(machine::checkSegment(st, f->resultType, f->effects, &whole).has_value());
      size_t cut = 1 + rng.below(st.size() - 1);
      std::vector<Frame> bottom(st.begin(), st.begin() + static_cast<long>(cut));
      std::vector<Frame> top(st.begin() + static_cast<long>(cut), st.end());
      machine::SegmentType b, t;
      REQUIRE_FALSE(machine::checkSegment(bottom, f->resultType, f->effects, &b).has_value());
      REQUIRE_FALSE(machine::checkSegment(top, b.accepts, b.effects, &t).has_value());
      CHECK(sameType(t.accepts, whole.accepts));
      CHECK(t.effects == whole.effects);
      ++splits;
    }
  }
  CHECK(splits > 100);
}

TEST_CASE("lowering preserves meaning on random programs") {
  SplitMix64 rng(2024);
  const std::string prelude =
      "fun g (y: int): int = (y * 2) + 1;"
      "fun len (l: list(int)): int = match l { [] -> 0 | h :: t -> 1 + len t };";
  for (int n = 0; n < 20; ++n) {
    ProgramGen gen{rng};
    std::string body = gen.expr(5, {}, {"xs"});
    std::string src = prelude + "fun f (xs: list(int)): int = " + body + ";";
    CAPTURE(src);
    auto sp = surface::parse(src);
    auto core = elaborate(sp);
    for (int k = 0; k < 3; ++k) {
      std::vector<std::int64_t> xs;
      std::vector<ValueRef> elems;
      for (std::uint64_t i = 0, len = rng.below(4); i < len; ++i) {
        xs.push_back(rng.range(-3, 3));
        elems.push_back(vInt(xs.back()));
      }
      RefEval ref{sp};
      auto want = std::get<std::int64_t>(ref.eval(sp.funs.back().body, {{"xs", xs}}));
      auto got = machine::runEntry(core, "f", vList(elems, sInt()), machine::Mode::profiling());
      REQUIRE(got.kind == machine::OutcomeKind::Value);
      CHECK(got.value->num == want);
      CHECK(got.net == ref.cost);
    }
  }
}

TEST_CASE("try around raise behaves like the handler it stands for") {
  auto a = elaborate(
      "effect Exc : unit => void;"
      "fun f (u: unit): unit = try (let _ = tick 2 in raise ()) catch x -> tick 1;");
  auto b = elaborate(
      "effect Exc : unit => void;"
      "fun f (u: unit): unit = handle (let _ = tick 2 in let e = do Exc () in absurd e) {"
      "  return r -> r | Exc x k -> tick 1 };");
  auto oa = machine::runEntry(a, "f", vUnit(), machine::Mode::profiling());
  auto ob = machine::runEntry(b, "f", vUnit(), machine::Mode::profiling());
  CHECK(oa.kind == machine::OutcomeKind::Value);
  CHECK(show(oa.value) == "()");
  CHECK(oa.net == ob.net);
  CHECK(oa.highWater == ob.highWater);
  CHECK(oa.net == 3);
}
