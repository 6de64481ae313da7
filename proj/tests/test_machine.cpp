#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "aara/driver.hpp"
#include "aara/elaborate.hpp"
#include "aara/errors.hpp"
#include "aara/machine.hpp"
#include "aara/surface.hpp"

using namespace aara;
using namespace aara::machine;

namespace {

std::string corpus(const std::string& name) { return std::string(AARA_CORPUS_DIR) + "/" + name + ".fx"; }

ValueRef lit(const std::string& text, const STypeRef& t) {
  return surface::literalValue(surface::parseExpr(text), t);
}

}  // namespace

TEST_SUITE("initState") {
  TEST_CASE("a returned unit with no budget") {
    State s = initState(cRet(vUnit()), Mode::metered(0));
    CHECK(s.stack.empty());
    CHECK(s.focus == Focus::Eval);
    CHECK(s.resource == 0);
    CoreProgram p;
    CHECK(step(s, p).kind == StepResult::Kind::Next);
    CHECK(s.focus == Focus::Return);
    CHECK(step(s, p).kind == StepResult::Kind::Final);
  }

  TEST_CASE("tick 1 with budget 1 finishes with nothing left") {
    CoreProgram p;
    Outcome o = run(p, cTick(1), Mode::metered(1));
    CHECK(o.kind == OutcomeKind::Value);
    CHECK(o.remaining == 0);
  }

  TEST_CASE("tick 1 with budget 1/2 exhausts") {
    CoreProgram p;
    CHECK(run(p, cTick(1), Mode::metered(Rat(1, 2))).kind == OutcomeKind::ResourceExhausted);
  }

  TEST_CASE("open terms are refused") {
    CHECK_THROWS_AS(initState(cRet(vVar("x", sInt())), Mode::profiling()), Error);
  }
}

TEST_SUITE("step") {
  TEST_CASE("let pushes a binder and keeps the resource") {
    auto e2 = cRet(vVar("x", sInt()));
    State s = initState(cLet("x", sInt(), cRet(vInt(4)), e2), Mode::metered(3));
    CoreProgram p;
    REQUIRE(step(s, p).kind == StepResult::Kind::Next);
    REQUIRE(s.stack.size() == 1);
    CHECK(s.stack.back().kind == Frame::Kind::Bind);
    CHECK(s.stack.back().x == "x");
    CHECK(s.stack.back().body == e2);
    CHECK(s.comp->kind == CompKind::Ret);
    CHECK(s.resource == 3);
  }

  TEST_CASE("propagating past a binder captures it") {
    CoreProgram p;
    State s = initState(cRet(vUnit()), Mode::metered(2));
    auto body = cRet(vUnit());
    s.stack.push_back(Frame{Frame::Kind::Bind, "x", sUnit(), body});
    s.focus = Focus::Propagate;
    s.label = "E";
    s.value = vInt(7);
    s.captured.push_back(Frame{Frame::Kind::Bind, "y", sUnit(), cRet(vUnit())});
    REQUIRE(step(s, p).kind == StepResult::Kind::Next);
    CHECK(s.stack.empty());
    CHECK(s.focus == Focus::Propagate);
    CHECK(s.label == "E");
    REQUIRE(s.captured.size() == 2);
    CHECK(s.captured.front().x == "x");
    CHECK(s.captured.front().body == body);
    CHECK(s.resource == 2);
  }

  TEST_CASE("resuming a continuation twice is stuck") {
    auto p = driver::elaborateUnchecked(driver::readFile(corpus("oneshot_twice")));
    Outcome o = runEntry(p, "oneshot_twice", vUnit(), Mode::profiling());
    CHECK(o.kind == OutcomeKind::RuntimeError);
    REQUIRE(o.stuck.has_value());
    CHECK(*o.stuck == StuckReason::OneShotViolation);
  }
}

TEST_SUITE("run") {
  TEST_CASE("a tick refunded is net zero with high water one") {
    CoreProgram p;
    Outcome o = run(p, cLet("_", sUnit(), cTick(1), cTick(-1)), Mode::profiling());
    CHECK(o.kind == OutcomeKind::Value);
    CHECK(o.net == 0);
    CHECK(o.highWater == 1);
  }

  TEST_CASE("store_lists on [[1],[2,3]] costs 8") {
    auto p = driver::loadProgram(corpus("store_lists"));
    auto arg = lit("[[1],[2,3]]", sList(sList(sInt())));
    Outcome o = runEntry(p, "store_lists", arg, Mode::profiling());
    CHECK(o.kind == OutcomeKind::Value);
    CHECK(o.net == 8);
    CHECK(o.highWater == 8);
    CHECK(runEntry(p, "store_lists", arg, Mode::metered(8)).kind == OutcomeKind::Value);
    CHECK(runEntry(p, "store_lists", arg, Mode::metered(7)).kind == OutcomeKind::ResourceExhausted);
  }

  TEST_CASE("an operation nobody handles ends the run") {
    auto p = driver::loadProgram(corpus("store_lists"));
    Outcome o = runEntry(p, "insert_lists", lit("[[5]]", sList(sList(sInt()))), Mode::profiling());
    CHECK(o.kind == OutcomeKind::UnhandledEffect);
    CHECK(o.label == "Insert");
    CHECK(show(o.value) == "[5]");
  }

  TEST_CASE("step limit") {
    auto p = elaborate("fun loop (u: unit): unit = loop ();");
    RunOptions opts;
    opts.stepLimit = 1000;
    Outcome o = runEntry(p, "loop", vUnit(), Mode::profiling(), opts);
    CHECK(o.kind == OutcomeKind::RuntimeError);
    CHECK(*o.stuck == StuckReason::StepLimit);
  }

  TEST_CASE("trace rows") {
    CoreProgram p;
    std::ostringstream out;
    RunOptions opts;
    opts.trace = &out;
    Outcome o = run(p, cLet("_", sUnit(), cTick(1), cTick(-1)), Mode::profiling(), opts);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(o.steps));
  }
}

TEST_SUITE("checkStateStructure") {
  TEST_CASE("a final return is well formed") {
    CoreProgram p;
    State s = initState(cRet(vUnit()), Mode::profiling());
    s.focus = Focus::Return;
    s.value = vUnit();
    CHECK_FALSE(checkStateStructure(s, p).has_value());
  }

  TEST_CASE("returning a pair into a list match is a violation") {
    CoreProgram p;
    auto list = sList(sInt());
    auto caseList = std::make_shared<Comp>();
    caseList->kind = CompKind::CaseList;
    caseList->type = sInt();
    caseList->v = vVar("x", list);
    caseList->x = "h";
    caseList->y = "t";
    caseList->e1 = cRet(vInt(0));
    caseList->e2 = cRet(vVar("h", sInt()));
    State s = initState(cRet(vUnit()), Mode::profiling());
    s.stack.push_back(Frame{Frame::Kind::Bind, "x", list, caseList});
    s.focus = Focus::Return;
    s.value = vPair(vInt(1), vInt(2));
    CHECK(checkStateStructure(s, p).has_value());
  }

  TEST_CASE("every state of a handled run is well formed") {
    auto p = driver::loadProgram(corpus("store_lists"));
    RunOptions opts;
    opts.checkStructure = true;
    Outcome o = runEntry(p, "store_lists", lit("[[1],[2,3],[]]", sList(sList(sInt()))), Mode::profiling(), opts);
    CHECK(o.kind == OutcomeKind::Value);
    CHECK(o.structuralViolations == 0);
    CHECK(o.firstViolation.empty());
  }
}
