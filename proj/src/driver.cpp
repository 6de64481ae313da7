#include "aara/driver.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aara/surface.hpp"

namespace aara::driver {

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Syntax, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CoreProgram loadProgram(const std::string& path, CostMetric m) { return elaborate(readFile(path), m); }

CoreProgram elaborateUnchecked(std::string_view source, CostMetric m) {
  return insertTicks(desugarExceptions(lowerToFineGrain(surface::parse(source))), m);
}

// Random inputs ---------------------------------------------------------------

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

std::int64_t SplitMix64::range(std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

std::uint64_t trialSeed(std::uint64_t seed, std::uint64_t i) {
  SplitMix64 g(seed ^ (i * 0xd1342543de82ef95ULL));
  return g.next();
}

namespace {

ValueRef randomInt(SplitMix64& rng, const InputShape& s) {
  for (;;) {
    std::int64_t n = rng.range(s.intMin, s.intMax);
    if (!s.nonzero || n != 0) return vInt(n);
  }
}

ValueRef functionOfType(const STypeRef& t, const CoreProgram& p) {
  for (const auto& f : p.funs) {
    auto ft = sFun(f.paramType, f.resultType, f.effects);
    if (sameType(ft, t)) return vFunRef(f.name, ft);
  }
  throw Error(ErrorKind::Unsupported, "no declared function of type " + show(t) + " to use as input");
}

}  // namespace

ValueRef randomValue(const STypeRef& t, SplitMix64& rng, const CoreProgram& p, const InputShape& s) {
  switch (t->kind) {
    case TypeKind::Unit: return vUnit();
    case TypeKind::Int: return randomInt(rng, s);
    case TypeKind::Prod: {
      ValueRef a = randomValue(t->a, rng, p, s);
      return vPair(a, randomValue(t->b, rng, p, s));
    }
    case TypeKind::Sum:
      if (rng.below(2) == 0) return vInl(randomValue(t->a, rng, p, s), t);
      return vInr(randomValue(t->b, rng, p, s), t);
    case TypeKind::List: {
      auto n = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.maxLen) + 1));
      std::vector<ValueRef> elems;
      for (int i = 0; i < n; ++i) elems.push_back(randomValue(t->a, rng, p, s));
      return vList(elems, t->a);
    }
    case TypeKind::Fun: return functionOfType(t, p);
    case TypeKind::Void:
    case TypeKind::LinFun: break;
  }
  throw Error(ErrorKind::Unsupported, "cannot generate a value of type " + show(t));
}

bool knownFamily(const std::string& f) {
  return f == "any" || f == "equal_lengths" || f == "uniform_inner" || f == "nonzero";
}

ValueRef familyValue(const std::string& family, const STypeRef& t, SplitMix64& rng, const CoreProgram& p,
                     int maxLen) {
  InputShape s;
  s.maxLen = maxLen;
  auto listOf = [&](const STypeRef& elem, int n, auto&& gen) {
    std::vector<ValueRef> xs;
    for (int i = 0; i < n; ++i) xs.push_back(gen());
    return vList(xs, elem);
  };
  auto len = [&]() { return static_cast<int>(rng.below(static_cast<std::uint64_t>(maxLen) + 1)); };
  if (family == "any") return randomValue(t, rng, p, s);
  if (family == "nonzero") {
    s.nonzero = true;
    return randomValue(t, rng, p, s);
  }
  if (family == "equal_lengths") {
    if (t->kind != TypeKind::Prod || t->a->kind != TypeKind::List || t->b->kind != TypeKind::List)
      throw Error(ErrorKind::Type, "equal_lengths needs a pair of lists, not " + show(t));
    int n = len();
    ValueRef l = listOf(t->a->a, n, [&] { return randomValue(t->a->a, rng, p, s); });
    ValueRef r = listOf(t->b->a, n, [&] { return randomValue(t->b->a, rng, p, s); });
    return vPair(l, r);
  }
  if (family == "uniform_inner") {
    if (t->kind != TypeKind::Prod || t->a->kind != TypeKind::List || t->a->a->kind != TypeKind::List ||
        t->b->kind != TypeKind::List)
      throw Error(ErrorKind::Type, "uniform_inner needs a list of lists paired with a list, not " + show(t));
    int k = len();
    int n = len();
    STypeRef inner = t->a->a;
    ValueRef vs = listOf(inner, n, [&] {
      return listOf(inner->a, k, [&] { return randomValue(inner->a, rng, p, s); });
    });
    ValueRef pt = listOf(t->b->a, k, [&] { return randomValue(t->b->a, rng, p, s); });
    return vPair(vs, pt);
  }
  throw Error(ErrorKind::Syntax, "unknown input family '" + family + "'");
}

// Goldens ---------------------------------------------------------------------

Golden parseGolden(std::string_view text, const std::string& name) {
  Golden g;
  g.name = name;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineNo = 0;
  auto bad = [&](const std::string& why) {
    return Error(ErrorKind::Syntax, name + ".golden:" + std::to_string(lineNo) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) throw bad("expected key=value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "entry") g.entry = value;
    else if (key == "status") {
      if (value != "bounded" && value != "unsolvable" && value != "rejected") throw bad("unknown status '" + value + "'");
      g.status = value;
    } else if (key == "error") g.error = value;
    else if (key == "signature") g.signature = value;
    else if (key == "bound") g.bound = value;
    else if (key == "tight_family") {
      if (!knownFamily(value)) throw bad("unknown family '" + value + "'");
      g.tightFamily = value;
    } else if (key == "ann") {
      auto colon = value.find(':');
      if (colon == std::string::npos || colon == 0) throw bad("expected ann=name:position");
      g.anns.emplace_back(value.substr(0, colon), value.substr(colon + 1));
    } else if (key == "constraint") {
      if (value.find("==") == std::string::npos) throw bad("expected constraint=lhs==rhs");
      g.constraints.push_back(value);
    } else if (key == "note") {
      continue;
    } else {
      throw bad("unknown key '" + key + "'");
    }
  }
  if (g.entry.empty()) throw bad("missing entry");
  if (g.status.empty()) throw bad("missing status");
  if (g.status == "rejected" && g.error.empty()) throw bad("rejected entries need error=<kind>");
  return g;
}

std::vector<Golden> loadCorpus(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<Golden> out;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Syntax, "no corpus directory '" + dir + "'");
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".golden") continue;
    std::string name = e.path().stem().string();
    Golden g = parseGolden(readFile(e.path().string()), name);
    g.programFile = (fs::path(dir) / (name + ".fx")).string();
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const Golden& a, const Golden& b) { return a.name < b.name; });
  return out;
}

Rat annotationAt(const Arrow& sig, std::string_view position) {
  if (position == "p") return sig.arg.pot;
  if (position == "p'") return sig.result.pot;
  auto bad = [&]() { return Error(ErrorKind::Syntax, "bad annotation position '" + std::string(position) + "'"); };
  TypeRef t;
  std::string_view rest;
  if (position.substr(0, 3) == "arg") t = sig.arg.type;
  else if (position.substr(0, 3) == "res") t = sig.result.type;
  else throw bad();
  rest = position.substr(3);
  std::optional<Rat> last;
  while (!rest.empty()) {
    if (rest.substr(0, 2) == "[]") {
      if (t->kind != TypeKind::List) throw bad();
      last = t->anns[0].pot;
      t = t->anns[0].type;
      rest.remove_prefix(2);
    } else if (rest.substr(0, 4) == ".inl" || rest.substr(0, 4) == ".inr") {
      if (t->kind != TypeKind::Sum) throw bad();
      const auto& a = t->anns[rest[3] == 'l' ? 0 : 1];
      last = a.pot;
      t = a.type;
      rest.remove_prefix(4);
    } else if (rest.substr(0, 2) == ".1" || rest.substr(0, 2) == ".2") {
      if (t->kind != TypeKind::Prod) throw bad();
      t = rest[1] == '1' ? t->fst : t->snd;
      last.reset();
      rest.remove_prefix(2);
    } else {
      throw bad();
    }
  }
  if (!last) throw bad();
  return *last;
}

EntryAnalysis analyzeEntry(const std::string& file, const std::string& entry, CostMetric m) {
  EntryAnalysis a;
  try {
    a.program = loadProgram(file, m);
    a.result = analysis::inferBound(a.program, entry);
  } catch (const Error& e) {
    a.error = e;
  }
  return a;
}

namespace {

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

Rat evalSide(const std::string& side, const Arrow& sig, const Golden& g) {
  Rat total = 0;
  std::string term;
  int sign = 1;
  auto flush = [&]() {
    std::string t = trim(term);
    term.clear();
    if (t.empty()) throw Error(ErrorKind::Syntax, "empty term in constraint '" + side + "'");
    Rat coeff = 1;
    std::string name = t;
    if (auto star = t.find('*'); star != std::string::npos) {
      auto c = parseRat(trim(t.substr(0, star)));
      if (!c) throw Error(ErrorKind::Syntax, "bad coefficient in '" + t + "'");
      coeff = *c;
      name = trim(t.substr(star + 1));
    }
    Rat value;
    if (auto lit = parseRat(name)) {
      value = *lit;
    } else {
      std::string pos = name;
      for (const auto& [n, p] : g.anns)
        if (n == name) pos = p;
      value = annotationAt(sig, pos);
    }
    total += sign * coeff * value;
  };
  for (size_t i = 0; i < side.size(); ++i) {
    char c = side[i];
    if ((c == '+' || c == '-') && !trim(term).empty() && trim(term).back() != '*') {
      flush();
      sign = c == '+' ? 1 : -1;
    } else if (c == '-' && trim(term).empty()) {
      sign = -sign;
    } else if (c != '+' || !trim(term).empty()) {
      term += c;
    }
  }
  flush();
  return total;
}

}  // namespace

GoldenCheck checkGolden(const Golden& g, const EntryAnalysis& a) {
  GoldenCheck c;
  auto miss = [&](std::string m) {
    c.ok = false;
    c.mismatches.push_back(std::move(m));
  };
  if (a.error) {
    if (g.status != "rejected") miss("expected " + g.status + ", got error " + a.error->diagnostic());
    else if (g.error != kindName(a.error->kind()))
      miss("expected error " + g.error + ", got " + kindName(a.error->kind()));
    return c;
  }
  const auto& r = *a.result;
  std::string status = r.status == analysis::Status::Bounded ? "bounded" : "unsolvable";
  if (status != g.status) {
    miss("expected status " + g.status + ", got " + status);
    return c;
  }
  if (status != "bounded") return c;
  if (!g.signature.empty() && g.signature != r.signatureText())
    miss("signature: expected `" + g.signature + "`, got `" + r.signatureText() + "`");
  if (!g.bound.empty() && g.bound != r.bound.pretty())
    miss("bound: expected `" + g.bound + "`, got `" + r.bound.pretty() + "`");
  for (const auto& k : g.constraints) {
    auto eq = k.find("==");
    try {
      Rat l = evalSide(k.substr(0, eq), r.signature, g);
      Rat rr = evalSide(k.substr(eq + 2), r.signature, g);
      if (l != rr) miss("constraint `" + k + "` fails: " + toString(l) + " != " + toString(rr));
    } catch (const Error& e) {
      miss("constraint `" + k + "`: " + e.what());
    }
  }
  return c;
}

// Empirical soundness ---------------------------------------------------------

bool TrialRecord::violation() const {
  if (kind == machine::OutcomeKind::RuntimeError) return true;
  return highWater > bound || structuralViolations > 0;
}

int VerifyReport::violations() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const TrialRecord& t) { return t.violation(); }));
}

std::uint64_t VerifyReport::structuralViolations() const {
  std::uint64_t n = 0;
  for (const auto& t : records) n += t.structuralViolations;
  return n;
}

namespace {

TrialRecord runTrial(const CoreProgram& p, const analysis::AnalysisResult& r, const VerifyOptions& o,
                     const FunDecl& f, int i) {
  TrialRecord t;
  t.index = i;
  SplitMix64 rng(trialSeed(o.seed, static_cast<std::uint64_t>(i)));
  int ramp = o.trials <= 1 ? 32 : std::min(32, (i * 33) / o.trials);
  t.fromFamily = !o.tightFamily.empty() && i % 4 == 3;
  if (t.fromFamily) {
    t.input = familyValue(o.tightFamily, f.paramType, rng, p, ramp);
  } else {
    InputShape s;
    s.maxLen = ramp;
    t.input = randomValue(f.paramType, rng, p, s);
  }
  t.bound = analysis::evalBound(r.bound, t.input);
  machine::RunOptions ro;
  ro.checkStructure = o.checkStructure;
  auto out = machine::runEntry(p, r.entry, t.input, machine::Mode::profiling(), ro);
  t.kind = out.kind;
  t.stuck = out.stuck;
  t.highWater = out.highWater;
  t.net = out.net;
  t.structuralViolations = out.structuralViolations;
  return t;
}

VerifyReport finish(const analysis::AnalysisResult& r, const VerifyOptions& o, std::vector<TrialRecord> recs) {
  VerifyReport rep;
  rep.entry = r.entry;
  rep.seed = o.seed;
  rep.trials = o.trials;
  rep.records = std::move(recs);
  for (size_t i = 0; i < rep.records.size(); ++i) {
    Rat slack = rep.records[i].bound - rep.records[i].highWater;
    if (i == 0 || slack < rep.minSlack) rep.minSlack = slack;
  }
  return rep;
}

const FunDecl& entryDecl(const CoreProgram& p, const analysis::AnalysisResult& r) {
  if (r.status != analysis::Status::Bounded)
    throw Error(ErrorKind::Unsupported, "'" + r.entry + "' has no bound to verify");
  const FunDecl* f = p.findFun(r.entry);
  if (!f) throw Error(ErrorKind::Scope, "no function named '" + r.entry + "'");
  return *f;
}

}  // namespace

VerifyReport verifySerial(const CoreProgram& p, const analysis::AnalysisResult& r, const VerifyOptions& o) {
  const FunDecl& f = entryDecl(p, r);
  std::vector<TrialRecord> recs;
  for (int i = 0; i < o.trials; ++i) recs.push_back(runTrial(p, r, o, f, i));
  return finish(r, o, std::move(recs));
}

VerifyReport verifyParallel(const CoreProgram& p, const analysis::AnalysisResult& r, const VerifyOptions& o) {
  const FunDecl& f = entryDecl(p, r);
  std::vector<TrialRecord> recs(static_cast<size_t>(std::max(o.trials, 0)));
  std::vector<std::optional<Error>> errors(recs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < o.trials; ++i) {
    try {
      recs[static_cast<size_t>(i)] = runTrial(p, r, o, f, i);
    } catch (const Error& e) {
      errors[static_cast<size_t>(i)] = e;
    }
  }
  for (auto& e : errors)
    if (e) throw *e;
  return finish(r, o, std::move(recs));
}

}  // namespace aara::driver
