#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "aara/errors.hpp"
#include "aara/lp.hpp"
#include "lp_oracle.hpp"

using namespace aara;
using namespace aara::lp;

TEST_CASE("fresh variables are distinct and keep their tags") {
  System s;
  Var a = s.newVar("sqdist.arg.outer");
  Var b = s.newVar("other");
  CHECK(a != b);
  CHECK(s.tag(a) == "sqdist.arg.outer");
}

TEST_CASE("a hundred thousand variables") {
  System s;
  std::set<Var> seen;
  for (int i = 0; i < 100000; ++i) seen.insert(s.newVar("v"));
  CHECK(seen.size() == 100000);
  CHECK(s.numVars() == 100000);
}

TEST_CASE("min x subject to x >= 3") {
  System s;
  Var x = s.newVar("x");
  s.addGe(LinExpr::var(x), LinExpr(3), "lb");
  Objective o;
  o.add(x, 1);
  auto r = solve(s, o);
  REQUIRE(r.status == SolveResult::Status::Optimal);
  CHECK(r.values.at(x) == 3);
}

TEST_CASE("x >= 1 and -x >= 0 is infeasible") {
  System s;
  Var x = s.newVar("x");
  s.addGe(LinExpr::var(x), LinExpr(1), "lb");
  s.addGe(LinExpr::var(x, -1), "ub");
  Objective o;
  o.add(x, 1);
  CHECK(solve(s, o).status == SolveResult::Status::Infeasible);
}

TEST_CASE("min 2a+b subject to a+b >= 4, a >= 1") {
  System s;
  Var a = s.newVar("a"), b = s.newVar("b");
  s.addGe(LinExpr::var(a) + LinExpr::var(b), LinExpr(4), "sum");
  s.addGe(LinExpr::var(a), LinExpr(1), "a");
  Objective o;
  o.add(a, 2);
  o.add(b, 1);
  auto r = solve(s, o);
  REQUIRE(r.status == SolveResult::Status::Optimal);
  CHECK(r.values.at(a) == 1);
  CHECK(r.values.at(b) == 3);
  CHECK(r.objective == 5);
  CHECK(testing::vertexOracle(s, o)->objective == 5);
}

TEST_CASE("equalities and exact fractions") {
  System s;
  Var a = s.newVar("a"), b = s.newVar("b");
  s.addEq(3 * LinExpr::var(a) - LinExpr::var(b), "ratio");
  s.addGe(LinExpr::var(a) + LinExpr::var(b), LinExpr(Rat(1, 3)), "total");
  Objective o;
  o.add(a, 1);
  o.add(b, 1);
  auto r = solve(s, o);
  REQUIRE(r.status == SolveResult::Status::Optimal);
  CHECK(r.values.at(a) == Rat(1, 12));
  CHECK(r.values.at(b) == Rat(1, 4));
}

TEST_CASE("evalAssignment") {
  LinExpr e = LinExpr::var(0, 2) + LinExpr::var(1, -1) + Rat(1, 2);
  CHECK(evalAssignment({{0, 3}, {1, 1}}, e) == Rat(11, 2));
  try {
    evalAssignment({{0, 3}}, e);
    FAIL("expected UnboundVar");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::UnboundVar);
  }
}

TEST_CASE("firstViolated reports constraints and negative values") {
  System s;
  Var x = s.newVar("x");
  s.addGe(LinExpr::var(x), LinExpr(2), "lb");
  CHECK(firstViolated(s, {{x, 2}}) == std::nullopt);
  CHECK(firstViolated(s, {{x, 1}}) == std::optional<std::size_t>(0));
  CHECK(firstViolated(s, {{x, -1}}).has_value());
}

TEST_CASE("random small systems agree with vertex enumeration") {
  std::mt19937_64 rng(42);
  int feasible = 0;
  for (int n = 0; n < 200; ++n) {
    System s = testing::randomSystem(rng);
    Objective o = testing::randomObjective(rng, s.numVars());
    auto got = solve(s, o);
    auto want = testing::vertexOracle(s, o);
    CAPTURE(s.dump(o));
    REQUIRE((got.status == SolveResult::Status::Optimal) == want.has_value());
    if (!want) continue;
    ++feasible;
    CHECK(got.objective == want->objective);
    CHECK(firstViolated(s, got.values) == std::nullopt);
  }
  CHECK(feasible > 50);
}
