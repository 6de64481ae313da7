#include <cctype>
#include <map>
#include <set>

#include "aara/errors.hpp"
#include "aara/surface.hpp"

namespace aara::surface {

namespace {

enum class Tok {
  LIdent, UIdent, Int, Sym, Eof
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  SrcPos pos;
};

const std::set<std::string> kKeywords = {
    "effect", "fun",    "main", "let",   "in",    "tick", "do",   "handle", "return",
    "forward", "raise", "try",  "catch", "match", "absurd", "fn", "inl",    "inr",
    "unit",   "void",   "int",  "list"};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto isIdent = [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'';
  };
  while (i < src.size()) {
    char ch = src[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      advance(1);
      continue;
    }
    if (ch == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      size_t j = i;
      while (j < src.size() && isIdent(src[j])) ++j;
      t.text = std::string(src.substr(i, j - i));
      if (kKeywords.count(t.text)) {
        t.kind = Tok::Sym;
      } else {
        t.kind = std::isupper(static_cast<unsigned char>(ch)) ? Tok::UIdent : Tok::LIdent;
      }
      advance(j - i);
    } else {
      static const char* twoChar[] = {"=>", "->", "::", "=="};
      t.kind = Tok::Sym;
      bool matched = false;
      if (ch == '-' && i + 1 < src.size() && src[i + 1] == 'o' &&
          (i + 2 >= src.size() || !isIdent(src[i + 2]))) {
        t.text = "-o";
        matched = true;
      }
      for (const char* s : twoChar) {
        if (matched) break;
        if (src.substr(i, 2) == s) {
          t.text = s;
          matched = true;
        }
      }
      if (!matched) {
        static const std::string single = "(),:;={}|[]+-*</";
        if (single.find(ch) == std::string::npos)
          throw Error(ErrorKind::Syntax, std::string("unexpected character '") + ch + "'", t.pos);
        t.text = std::string(1, ch);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token eof;
  eof.pos = {line, col};
  out.push_back(eof);
  return out;
}

std::shared_ptr<Expr> node(ExprKind k, SrcPos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->pos = pos;
  return e;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  SurfaceProgram program() {
    SurfaceProgram p;
    std::set<std::string> funNames;
    bool sawMain = false;
    while (!atEof()) {
      const Token& t = peek();
      if (isSym("effect")) {
        next();
        EffectDecl d;
        d.pos = t.pos;
        d.label = expect(Tok::UIdent, "effect label").text;
        for (const auto& e : p.effects)
          if (e.label == d.label)
            throw Error(ErrorKind::DuplicateName, "effect '" + d.label + "' declared twice", d.pos);
        expectSym(":");
        d.input = type();
        expectSym("=>");
        d.output = type();
        expectSym(";");
        p.effects.push_back(std::move(d));
      } else if (isSym("fun")) {
        next();
        FunDecl f;
        f.pos = t.pos;
        f.name = expect(Tok::LIdent, "function name").text;
        if (!funNames.insert(f.name).second)
          throw Error(ErrorKind::DuplicateName, "function '" + f.name + "' defined twice", f.pos);
        expectSym("(");
        f.param = expect(Tok::LIdent, "parameter name").text;
        expectSym(":");
        f.paramType = type();
        expectSym(")");
        expectSym(":");
        f.resultType = typeNoEffects();
        if (acceptSym("/")) f.effects = effectSet();
        expectSym("=");
        f.body = expr();
        expectSym(";");
        p.funs.push_back(std::move(f));
      } else if (isSym("main")) {
        if (sawMain) throw Error(ErrorKind::DuplicateName, "main defined twice", t.pos);
        sawMain = true;
        p.mainPos = t.pos;
        next();
        expectSym("=");
        p.main = expr();
        expectSym(";");
      } else {
        fail("expected 'effect', 'fun' or 'main'");
      }
    }
    checkLabels(p);
    return p;
  }

  ExprRef exprOnly() {
    ExprRef e = expr();
    if (!atEof()) fail("trailing input after expression");
    return e;
  }

  STypeRef typeOnly() {
    STypeRef t = type();
    if (!atEof()) fail("trailing input after type");
    return t;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool atEof() const { return peek().kind == Tok::Eof; }
  bool isSym(const char* s, size_t k = 0) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool acceptSym(const char* s) {
    if (!isSym(s)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::Eof ? "end of input" : "'" + t.text + "'";
    throw Error(ErrorKind::Syntax, msg + ", found " + got, t.pos);
  }

  void expectSym(const char* s) {
    if (!acceptSym(s)) fail(std::string("expected '") + s + "'");
  }

  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    return next();
  }

  // Types ------------------------------------------------------------------

  EffectSet effectSet() {
    EffectSet s;
    expectSym("{");
    if (!isSym("}")) {
      do {
        s.insert(expect(Tok::UIdent, "effect label").text);
      } while (acceptSym(","));
    }
    expectSym("}");
    return s;
  }

  STypeRef type() { return arrowType(true); }
  // A function result type: the trailing `/ {..}` belongs to the declaration.
  STypeRef typeNoEffects() { return arrowType(false); }

  STypeRef arrowType(bool allowEffects) {
    STypeRef lhs = sumType();
    bool lin = isSym("-o");
    if (!lin && !isSym("->")) return lhs;
    next();
    STypeRef rhs = arrowType(allowEffects);
    EffectSet eff;
    if (allowEffects && acceptSym("/")) eff = effectSet();
    return lin ? sLinFun(lhs, rhs, eff) : sFun(lhs, rhs, eff);
  }

  STypeRef sumType() {
    STypeRef t = prodType();
    while (acceptSym("+")) t = sSum(t, prodType());
    return t;
  }

  STypeRef prodType() {
    STypeRef t = atomType();
    while (acceptSym("*")) t = sProd(t, atomType());
    return t;
  }

  STypeRef atomType() {
    if (acceptSym("unit")) return sUnit();
    if (acceptSym("void")) return sVoid();
    if (acceptSym("int")) return sInt();
    if (acceptSym("list")) {
      expectSym("(");
      STypeRef e = type();
      expectSym(")");
      return sList(e);
    }
    if (acceptSym("(")) {
      STypeRef t = type();
      expectSym(")");
      return t;
    }
    fail("expected a type");
  }

  // Expressions -----------------------------------------------------------

  Rat rational() {
    bool neg = acceptSym("-");
    const Token& n = expect(Tok::Int, "number");
    std::string text = n.text;
    if (acceptSym("/")) text += "/" + expect(Tok::Int, "denominator").text;
    auto q = parseRat(text);
    if (!q) throw Error(ErrorKind::Syntax, "malformed rational '" + text + "'", n.pos);
    return neg ? Rat(-*q) : *q;
  }

  std::string binder() {
    return expect(Tok::LIdent, "variable name").text;
  }

  ExprRef expr() {
    const Token& t = peek();
    SrcPos p = t.pos;
    if (acceptSym("let")) {
      auto e = node(ExprKind::Let, p);
      e->name = binder();
      expectSym("=");
      e->a = expr();
      expectSym("in");
      e->b = expr();
      return e;
    }
    if (acceptSym("tick")) {
      auto e = node(ExprKind::Tick, p);
      e->amount = rational();
      return e;
    }
    if (acceptSym("do")) {
      auto e = node(ExprKind::Do, p);
      e->name = expect(Tok::UIdent, "effect label").text;
      e->a = expr();
      return e;
    }
    if (acceptSym("raise")) {
      auto e = node(ExprKind::Raise, p);
      e->a = expr();
      return e;
    }
    if (acceptSym("absurd")) {
      auto e = node(ExprKind::Absurd, p);
      e->a = expr();
      return e;
    }
    if (acceptSym("fn")) {
      auto e = node(ExprKind::Lam, p);
      e->name = binder();
      expectSym("->");
      e->a = expr();
      return e;
    }
    if (acceptSym("try")) {
      auto e = node(ExprKind::Try, p);
      e->a = expr();
      expectSym("catch");
      e->name = binder();
      expectSym("->");
      e->b = expr();
      return e;
    }
    if (acceptSym("handle")) return handle(p);
    if (acceptSym("match")) return match(p);
    return compare();
  }

  ExprRef handle(SrcPos p) {
    auto e = node(ExprKind::Handle, p);
    e->a = expr();
    expectSym("{");
    expectSym("return");
    e->name = binder();
    expectSym("->");
    e->b = expr();
    std::set<std::string> seen;
    while (acceptSym("|")) {
      SrcPos cp = peek().pos;
      if (acceptSym("forward")) {
        std::string l = expect(Tok::UIdent, "effect label").text;
        if (!seen.insert(l).second)
          throw Error(ErrorKind::DuplicateName, "label '" + l + "' handled twice", cp);
        e->forwards.push_back(l);
        continue;
      }
      HandlerClause c;
      c.pos = cp;
      c.label = expect(Tok::UIdent, "effect label").text;
      if (!seen.insert(c.label).second)
        throw Error(ErrorKind::DuplicateName, "label '" + c.label + "' handled twice", cp);
      c.x = binder();
      c.c = binder();
      expectSym("->");
      c.body = expr();
      e->clauses.push_back(std::move(c));
    }
    expectSym("}");
    return e;
  }

  ExprRef match(SrcPos p) {
    ExprRef scrut = expr();
    expectSym("{");
    std::shared_ptr<Expr> e;
    if (isSym("[")) {
      e = node(ExprKind::MatchList, p);
      next();
      expectSym("]");
      expectSym("->");
      e->b = expr();
      expectSym("|");
      e->x = binder();
      expectSym("::");
      e->y = binder();
      expectSym("->");
      e->c = expr();
    } else if (isSym("inl")) {
      e = node(ExprKind::MatchSum, p);
      next();
      e->x = binder();
      expectSym("->");
      e->b = expr();
      expectSym("|");
      expectSym("inr");
      e->y = binder();
      expectSym("->");
      e->c = expr();
    } else if (isSym("(")) {
      e = node(ExprKind::MatchPair, p);
      next();
      e->x = binder();
      expectSym(",");
      e->y = binder();
      expectSym(")");
      expectSym("->");
      e->b = expr();
    } else {
      fail("expected '[]', 'inl' or '(' pattern");
    }
    expectSym("}");
    e->a = scrut;
    return e;
  }

  ExprRef binop(ExprRef l, PrimOp op, ExprRef r, SrcPos p) {
    auto e = node(ExprKind::Binop, p);
    e->a = std::move(l);
    e->b = std::move(r);
    e->op = op;
    return e;
  }

  ExprRef compare() {
    ExprRef l = cons();
    SrcPos p = peek().pos;
    if (acceptSym("<")) return binop(l, PrimOp::Lt, cons(), p);
    if (acceptSym("==")) return binop(l, PrimOp::Eq, cons(), p);
    return l;
  }

  ExprRef cons() {
    ExprRef h = additive();
    SrcPos p = peek().pos;
    if (acceptSym("::")) {
      auto e = node(ExprKind::Cons, p);
      e->a = h;
      e->b = cons();
      return e;
    }
    return h;
  }

  ExprRef additive() {
    ExprRef l = multiplicative();
    for (;;) {
      SrcPos p = peek().pos;
      if (acceptSym("+")) {
        l = binop(l, PrimOp::Add, multiplicative(), p);
      } else if (acceptSym("-")) {
        l = binop(l, PrimOp::Sub, multiplicative(), p);
      } else {
        return l;
      }
    }
  }

  ExprRef multiplicative() {
    ExprRef l = application();
    for (;;) {
      SrcPos p = peek().pos;
      if (!acceptSym("*")) return l;
      l = binop(l, PrimOp::Mul, application(), p);
    }
  }

  bool startsAtom() const {
    const Token& t = peek();
    if (t.kind == Tok::Int || t.kind == Tok::LIdent) return true;
    return isSym("(") || isSym("[") || isSym("inl") || isSym("inr");
  }

  ExprRef application() {
    ExprRef f;
    if (isSym("-") && peek(1).kind == Tok::Int) {
      SrcPos p = next().pos;
      f = intLit(next(), true, p);
    } else {
      f = atom();
    }
    while (startsAtom()) {
      SrcPos p = peek().pos;
      auto e = node(ExprKind::App, p);
      e->a = f;
      e->b = atom();
      f = e;
    }
    return f;
  }

  ExprRef intLit(const Token& t, bool neg, SrcPos p) {
    auto e = node(ExprKind::Int, p);
    try {
      std::string text = (neg ? "-" : "") + t.text;
      size_t used = 0;
      e->num = std::stoll(text, &used);
      if (used != text.size()) throw std::out_of_range("");
    } catch (const std::exception&) {
      throw Error(ErrorKind::Syntax, "integer literal out of range", t.pos);
    }
    return e;
  }

  ExprRef atom() {
    const Token& t = peek();
    SrcPos p = t.pos;
    if (t.kind == Tok::Int) return intLit(next(), false, p);
    if (t.kind == Tok::LIdent) {
      auto e = node(ExprKind::Var, p);
      e->name = next().text;
      return e;
    }
    if (acceptSym("inl") || acceptSym("inr")) {
      bool left = toks_[pos_ - 1].text == "inl";
      auto e = node(left ? ExprKind::Inl : ExprKind::Inr, p);
      e->a = atom();
      return e;
    }
    if (acceptSym("[")) {
      std::vector<ExprRef> elems;
      if (!isSym("]")) {
        do {
          elems.push_back(expr());
        } while (acceptSym(","));
      }
      expectSym("]");
      ExprRef list = node(ExprKind::Nil, p);
      for (auto it = elems.rbegin(); it != elems.rend(); ++it) {
        auto c = node(ExprKind::Cons, (*it)->pos);
        c->a = *it;
        c->b = list;
        list = c;
      }
      return list;
    }
    if (acceptSym("(")) {
      if (acceptSym(")")) return node(ExprKind::Unit, p);
      ExprRef first = expr();
      if (acceptSym(",")) {
        auto e = node(ExprKind::Pair, p);
        e->a = first;
        e->b = expr();
        expectSym(")");
        return e;
      }
      expectSym(")");
      return first;
    }
    fail("expected an expression");
  }

  // Label checks ------------------------------------------------------------

  void checkLabels(const SurfaceProgram& p) {
    std::set<std::string> declared;
    for (const auto& e : p.effects) declared.insert(e.label);
    auto known = [&](const std::string& l) { return declared.count(l) || l == kExcLabel; };
    auto checkType = [&](const STypeRef& t, SrcPos pos, auto&& self) -> void {
      if (!t) return;
      for (const auto& l : t->effects)
        if (!known(l)) throw Error(ErrorKind::UnknownEffectLabel, "unknown effect '" + l + "'", pos);
      self(t->a, pos, self);
      self(t->b, pos, self);
    };
    for (const auto& e : p.effects) {
      checkType(e.input, e.pos, checkType);
      checkType(e.output, e.pos, checkType);
    }
    for (const auto& f : p.funs) {
      for (const auto& l : f.effects)
        if (!known(l))
          throw Error(ErrorKind::UnknownEffectLabel, "unknown effect '" + l + "' in signature of '" +
                                                         f.name + "'",
                      f.pos);
      checkType(f.paramType, f.pos, checkType);
      checkType(f.resultType, f.pos, checkType);
      checkBody(f.body, known);
    }
    if (p.main) checkBody(p.main, known);
  }

  template <class Known>
  void checkBody(const ExprRef& e, Known& known) {
    if (!e) return;
    if (e->kind == ExprKind::Do) {
      if (!known(e->name))
        throw Error(ErrorKind::UnknownEffectLabel, "unknown effect '" + e->name + "'", e->pos);
    }
    if (e->kind == ExprKind::Handle) {
      for (const auto& c : e->clauses)
        if (!known(c.label))
          throw Error(ErrorKind::UnknownEffectLabel, "unknown effect '" + c.label + "'", c.pos);
      for (const auto& l : e->forwards)
        if (!known(l))
          throw Error(ErrorKind::UnknownEffectLabel, "unknown effect '" + l + "'", e->pos);
    }
    checkBody(e->a, known);
    checkBody(e->b, known);
    checkBody(e->c, known);
    for (const auto& c : e->clauses) checkBody(c.body, known);
  }
};

}  // namespace

SurfaceProgram parse(std::string_view text) { return Parser(text).program(); }
ExprRef parseExpr(std::string_view text) { return Parser(text).exprOnly(); }
STypeRef parseType(std::string_view text) { return Parser(text).typeOnly(); }

}  // namespace aara::surface
