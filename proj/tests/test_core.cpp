#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aara/errors.hpp"
#include "aara/potential.hpp"
#include "aara/rational.hpp"
#include "aara/syntax.hpp"
#include "aara/types.hpp"

using namespace aara;

namespace {

TypeRef unitT() { return makeBase<Rat>(TypeKind::Unit); }
TypeRef listOf(TypeRef elem, Rat q) { return makeList<Rat>({std::move(elem), std::move(q)}); }

ValueRef units(int n) {
  std::vector<ValueRef> xs(static_cast<size_t>(n), vUnit());
  return vList(xs, sUnit());
}

}  // namespace

TEST_CASE("rationals print and parse") {
  CHECK(toString(Rat(3, 4)) == "3/4");
  CHECK(toString(Rat(6, 3)) == "2");
  CHECK(*parseRat("-1/100") == Rat(-1, 100));
  CHECK_FALSE(parseRat("1/0").has_value());
  CHECK_FALSE(parseRat("abc").has_value());
}

TEST_CASE("potential of a list of units is q times its length") {
  CHECK(potential(units(3), listOf(unitT(), 2)) == 6);
  CHECK(potential(units(0), listOf(unitT(), 2)) == 0);
}

TEST_CASE("potential of an injection is the annotation of its side") {
  auto sum = makeSum<Rat>({unitT(), 3}, {unitT(), 5});
  auto b = sSum(sUnit(), sUnit());
  CHECK(potential(vInl(vUnit(), b), sum) == 3);
  CHECK(potential(vInr(vUnit(), b), sum) == 5);
}

TEST_CASE("functions carry no potential") {
  Arrow a{{unitT(), 0}, {unitT(), 0}, {}};
  auto f = makeArrowType<Rat>(TypeKind::Fun, a, "f");
  CHECK(potential(vFunRef("f", sFun(sUnit(), sUnit(), {})), f) == 0);
}

TEST_CASE("potential of nested lists sums both levels") {
  auto inner = [](int n) { return units(n); };
  auto v = vList({inner(1), inner(2)}, sList(sUnit()));
  CHECK(potential(v, listOf(listOf(unitT(), 1), 2)) == 7);
}

TEST_CASE("potential rejects values outside the type") {
  CHECK_THROWS_AS(potential(vInt(3), listOf(unitT(), 1)), Error);
}

TEST_CASE("zero clears every annotation") {
  auto z = zero(AnnType{listOf(unitT(), 3), 4});
  CHECK(sameAnnType(z, AnnType{listOf(unitT(), 0), 0}));
  CHECK(sameAnnType(zero(AnnType{unitT(), 0}), AnnType{unitT(), 0}));
}

TEST_CASE("zero is undefined on linear functions") {
  Arrow a{{unitT(), 1}, {unitT(), 0}, {}};
  auto lf = makeArrowType<Rat>(TypeKind::LinFun, a);
  try {
    zero(lf);
    FAIL("expected LinearInZero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LinearInZero);
  }
}

TEST_CASE("isPotentialFree") {
  CHECK(isPotentialFree(listOf(unitT(), 0)));
  CHECK_FALSE(isPotentialFree(listOf(unitT(), 1)));
  Arrow zeroArrow{{unitT(), 0}, {unitT(), 0}, {}};
  CHECK_FALSE(isPotentialFree(makeArrowType<Rat>(TypeKind::LinFun, zeroArrow)));
  CHECK(isPotentialFree(makeArrowType<Rat>(TypeKind::Fun, zeroArrow, "f")));
}

TEST_CASE("annotated types print canonically") {
  auto t = makeProd<Rat>(listOf(makeBase<Rat>(TypeKind::Int), 0), listOf(makeBase<Rat>(TypeKind::Int), 1));
  CHECK(show(t) == "L^0(int) * L^1(int)");
  CHECK(show(makeSum<Rat>({unitT(), Rat(1, 2)}, {unitT(), 0})) == "unit^1/2 + unit^0");
}

TEST_CASE("annotateUniform and erase are inverse on the skeleton") {
  auto s = sProd(sList(sInt()), sSum(sUnit(), sList(sUnit())));
  auto a = annotateUniform(s, 2);
  CHECK(sameType(erase(a.type), s));
  CHECK_FALSE(isPotentialFree(a));
}

TEST_CASE("substitution respects shadowing") {
  auto body = cLet("x", sInt(), cRet(vVar("x", sInt())), cRet(vVar("x", sInt())));
  auto e = subst(body, {{"x", vInt(5)}});
  CHECK(show(e->e1->v) == "5");
  CHECK(e->e2->v->kind == ValueKind::Var);
  CHECK(freeVars(body) == std::set<std::string>{"x"});
}

TEST_CASE("value equality is structural") {
  auto a = vList({vInt(1), vInt(2)}, sInt());
  auto b = vList({vInt(1), vInt(2)}, sInt());
  CHECK(sameValue(a, b));
  CHECK_FALSE(sameValue(a, vList({vInt(1)}, sInt())));
}
