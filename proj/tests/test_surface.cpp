#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aara/elaborate.hpp"
#include "aara/errors.hpp"
#include "aara/surface.hpp"
#include "walk.hpp"

using namespace aara;
using aara::testing::count;

namespace {

ErrorKind failureOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Internal;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const FunDecl& fun(const CoreProgram& p, const std::string& name) {
  const FunDecl* f = p.findFun(name);
  REQUIRE(f != nullptr);
  return *f;
}

}  // namespace

TEST_SUITE("parse") {
  TEST_CASE("identity function") {
    auto p = surface::parse("fun id (x: unit): unit = x;");
    REQUIRE(p.funs.size() == 1);
    CHECK(p.funs[0].name == "id");
    CHECK(p.funs[0].body->kind == surface::ExprKind::Var);
    CHECK(p.funs[0].body->name == "x");
  }

  TEST_CASE("effect declaration") {
    auto p = surface::parse("effect Insert : list(int) => unit;");
    REQUIRE(p.effects.size() == 1);
    CHECK(p.effects[0].label == "Insert");
    CHECK(sameType(p.effects[0].input, sList(sInt())));
    CHECK(sameType(p.effects[0].output, sUnit()));
  }

  TEST_CASE("unbound variable parses and fails scope checking") {
    auto p = surface::parse("fun f (x: unit): unit = y;");
    CHECK(p.funs.size() == 1);
    CHECK(failureOf([&] { lowerToFineGrain(p); }) == ErrorKind::Scope);
  }

  TEST_CASE("syntax errors carry a position") {
    try {
      surface::parse("fun f (x: unit): unit = let in x;");
      FAIL("expected a syntax error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Syntax);
      CHECK(e.pos().line == 1);
      CHECK(e.pos().col > 0);
    }
  }

  TEST_CASE("duplicate names and unknown labels") {
    CHECK(failureOf([] { surface::parse("fun f (x: unit): unit = x; fun f (x: unit): unit = x;"); }) ==
          ErrorKind::DuplicateName);
    CHECK(failureOf([] { surface::parse("fun f (x: unit): unit / {Nope} = x;"); }) ==
          ErrorKind::UnknownEffectLabel);
  }

  TEST_CASE("types parse with the usual precedence") {
    CHECK(show(surface::parseType("list(int) * list(int)")) == show(sProd(sList(sInt()), sList(sInt()))));
    CHECK(sameType(surface::parseType("unit + unit * int"), sSum(sUnit(), sProd(sUnit(), sInt()))));
  }

  TEST_CASE("printing is a parse fixpoint over the corpus") {
    int files = 0;
    for (const auto& ent : std::filesystem::directory_iterator(AARA_CORPUS_DIR)) {
      if (ent.path().extension() != ".fx") continue;
      CAPTURE(ent.path().string());
      auto p = surface::parse(slurp(ent.path()));
      std::string once = surface::print(p);
      auto q = surface::parse(once);
      CHECK(surface::sameProgram(p, q));
      CHECK(surface::print(q) == once);
      ++files;
    }
    CHECK(files >= 10);
  }

  TEST_CASE("literal values") {
    auto v = surface::literalValue(surface::parseExpr("[[1],[2,3]]"), sList(sList(sInt())));
    CHECK(show(v) == "[[1], [2, 3]]");
    CHECK_THROWS_AS(surface::literalValue(surface::parseExpr("(1, 2)"), sList(sInt())), Error);
  }
}

TEST_SUITE("lowerToFineGrain") {
  const char* kTwoFuns = "fun g (x: int): int = x; fun f (x: int): int = x;";

  TEST_CASE("nested application is named") {
    auto p = lowerToFineGrain(surface::parse(std::string(kTwoFuns) + "fun h (x: int): int = f (g x);"));
    auto body = fun(p, "h").body;
    REQUIRE(body->kind == CompKind::Let);
    CHECK(body->e1->kind == CompKind::App);
    CHECK(body->e1->v->name == "g");
    REQUIRE(body->e2->kind == CompKind::App);
    CHECK(body->e2->v->name == "f");
    CHECK(body->e2->w->name == body->x);
  }

  TEST_CASE("a pair in computation position is returned") {
    auto p = lowerToFineGrain(surface::parse("fun f (x: int): int * int = (x, x);"));
    auto body = fun(p, "f").body;
    REQUIRE(body->kind == CompKind::Ret);
    CHECK(body->v->kind == ValueKind::Pair);
  }

  TEST_CASE("matching on a call binds the scrutinee first") {
    auto p = lowerToFineGrain(surface::parse(
        "fun g (x: list(int)): list(int) = x;"
        "fun f (x: list(int)): int = match g x { [] -> 0 | h :: t -> h };"));
    auto body = fun(p, "f").body;
    REQUIRE(body->kind == CompKind::Let);
    CHECK(body->e1->kind == CompKind::App);
    REQUIRE(body->e2->kind == CompKind::CaseList);
    CHECK(body->e2->v->name == body->x);
  }

  TEST_CASE("functions come out callee first") {
    auto p = lowerToFineGrain(surface::parse(
        "fun a (x: int): int = b x; fun b (x: int): int = x;"));
    REQUIRE(p.funs.size() == 2);
    CHECK(p.funs[0].name == "b");
    CHECK(p.funs[1].name == "a");
  }

  TEST_CASE("type errors") {
    CHECK(failureOf([] { lowerToFineGrain(surface::parse("fun f (x: int): unit = x;")); }) ==
          ErrorKind::Type);
  }

  TEST_CASE("performing an undeclared effect") {
    CHECK(failureOf([] {
            lowerToFineGrain(surface::parse(
                "effect E : unit => unit; fun f (x: unit): unit = do E ();"));
          }) == ErrorKind::EffectNotInSignature);
  }
}

TEST_SUITE("desugarExceptions") {
  TEST_CASE("raise becomes an operation followed by absurd") {
    auto p = desugarExceptions(lowerToFineGrain(surface::parse(
        "effect Exc : unit => void; fun f (x: unit): int / {Exc} = raise ();")));
    auto body = fun(p, "f").body;
    REQUIRE(body->kind == CompKind::Let);
    REQUIRE(body->e1->kind == CompKind::Do);
    CHECK(body->e1->label == surface::kExcLabel);
    REQUIRE(body->e2->kind == CompKind::CaseVoid);
    CHECK(body->e2->v->name == body->x);
  }

  TEST_CASE("try becomes a handler for the exception label") {
    auto p = desugarExceptions(lowerToFineGrain(surface::parse(
        "effect Exc : unit => void; fun f (x: unit): unit = try raise () catch e -> ();")));
    auto body = fun(p, "f").body;
    REQUIRE(body->kind == CompKind::Handle);
    REQUIRE(body->branches.size() == 1);
    CHECK(body->branches[0].label == surface::kExcLabel);
    CHECK(count(p, CompKind::Raise) == 0);
    CHECK(count(p, CompKind::Try) == 0);
  }

  TEST_CASE("programs without exceptions are unchanged") {
    auto p = lowerToFineGrain(surface::parse(
        "fun f (l: list(int)): int = match l { [] -> 0 | h :: t -> h + f t };"));
    CHECK(show(desugarExceptions(p)) == show(p));
  }
}

TEST_SUITE("insertSharing") {
  TEST_CASE("a list used twice is split") {
    auto p = insertSharing(lowerToFineGrain(surface::parse(
        "fun f (x: list(unit)): list(unit) * list(unit) = (x, x);")));
    auto body = fun(p, "f").body;
    REQUIRE(body->kind == CompKind::Share);
    CHECK(body->x == "x");
    CHECK(body->y != body->z);
    REQUIRE(body->e1->kind == CompKind::Ret);
    CHECK(body->e1->v->a->name == body->y);
    CHECK(body->e1->v->b->name == body->z);
    CHECK(isSyntacticallyLinear(p));
  }

  TEST_CASE("a recursive function may call itself twice") {
    auto src =
        "fun f (l: list(int)): int = match l { [] -> 0 | h :: t -> let a = f t in let b = f t in a + b };";
    auto lowered = lowerToFineGrain(surface::parse(src));
    auto shared = insertSharing(lowered);
    CHECK(count(shared, CompKind::Share) == 1);  // the tail t, not f
    CHECK(isSyntacticallyLinear(shared));
  }

  TEST_CASE("resuming a continuation twice is rejected") {
    auto lowered = lowerToFineGrain(surface::parse(slurp(std::filesystem::path(AARA_CORPUS_DIR) / "oneshot_twice.fx")));
    try {
      insertSharing(lowered);
      FAIL("expected LinearReuse");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::LinearReuse);
      CHECK(std::string(e.what()).find('k') != std::string::npos);
    }
  }

  TEST_CASE("the linearity oracle flags unshared reuse") {
    auto lowered = lowerToFineGrain(surface::parse("fun f (x: list(unit)): list(unit) * list(unit) = (x, x);"));
    std::string why;
    CHECK_FALSE(isSyntacticallyLinear(lowered, &why));
    CHECK(why.find('x') != std::string::npos);
  }
}

TEST_SUITE("insertTicks") {
  const char* kSrc =
      "effect E : unit => unit;"
      "fun g (x: int): int = x;"
      "fun f (x: int): int = g x;"
      "fun h (x: unit): unit = handle do E () { return r -> r | E u k -> k () };";

  TEST_CASE("call ticks") {
    auto p = insertTicks(lowerToFineGrain(surface::parse(kSrc)), {true, false});
    auto body = fun(p, "f").body;
    REQUIRE(body->kind == CompKind::Let);
    REQUIRE(body->e1->kind == CompKind::Tick);
    CHECK(body->e1->amount == 1);
    CHECK(body->e2->kind == CompKind::App);
    // resuming a continuation is not a call
    CHECK(count(fun(p, "h").body, CompKind::Tick) == 0);
  }

  TEST_CASE("no metric is the identity") {
    auto p = lowerToFineGrain(surface::parse(kSrc));
    CHECK(show(insertTicks(p, {false, false})) == show(p));
  }

  TEST_CASE("handler ticks count branches") {
    auto p = lowerToFineGrain(surface::parse(
        "effect A : unit => unit; effect B : unit => unit;"
        "fun h (x: unit): unit = handle let _ = do A () in do B () {"
        "  return r -> r | A u k -> k () | B u k -> k () };"));
    CHECK(count(insertTicks(p, {false, true}), CompKind::Tick) == 2);
  }
}
