#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "aara/driver.hpp"
#include "aara/surface.hpp"

using namespace aara;
using nlohmann::ordered_json;

namespace {

enum Exit { Ok = 0, Usage = 1, Unsolvable = 2, Exhausted = 3, Unsound = 4, Mismatch = 5 };

int fail(const std::string& file, const Error& e) {
  std::cerr << file << ":" << e.diagnostic() << "\n";
  return Usage;
}

std::string defaultEntry(const CoreProgram& p, const std::string& file) {
  std::string stem = std::filesystem::path(file).stem().string();
  if (p.findFun(stem)) return stem;
  if (p.funs.empty()) throw Error(ErrorKind::Scope, "the program declares no functions");
  return p.funs.back().name;
}

std::string goldenPathFor(const std::string& file) {
  return std::filesystem::path(file).replace_extension(".golden").string();
}

ordered_json boundJson(const analysis::BoundPolynomial& b) {
  ordered_json terms = ordered_json::array();
  for (const auto& t : b.terms) {
    const char* kind = t.kind == analysis::BoundTerm::Kind::Length ? "length"
                       : t.kind == analysis::BoundTerm::Kind::Inl ? "inl"
                                                                   : "inr";
    terms.push_back({{"name", t.name}, {"kind", kind}, {"coeff", toString(t.coeff)}});
  }
  return {{"pretty", b.pretty()}, {"constant", toString(b.constant)}, {"terms", terms}};
}

ordered_json resultJson(const analysis::AnalysisResult& r, bool timing) {
  bool bounded = r.status == analysis::Status::Bounded;
  ordered_json j = {{"name", r.entry}, {"status", bounded ? "bounded" : "unsolvable"}};
  j["signature"] = bounded ? ordered_json(r.signatureText()) : ordered_json(nullptr);
  j["bound"] = bounded ? boundJson(r.bound) : ordered_json(nullptr);
  j["lp"] = {{"vars", r.lp.vars}, {"constraints", r.lp.constraints}, {"pivots", r.lp.pivots}};
  if (timing) j["time_ms"] = r.elapsedMs;
  return j;
}

void printResult(const analysis::AnalysisResult& r) {
  bool bounded = r.status == analysis::Status::Bounded;
  std::cout << "function " << r.entry << "\n";
  std::cout << "  status: " << (bounded ? "bounded" : "unsolvable") << "\n";
  if (bounded) {
    std::cout << "  signature: " << r.signatureText() << "\n";
    std::cout << "  bound: " << r.bound.pretty() << "\n";
  }
  std::cout << "  lp: vars=" << r.lp.vars << " constraints=" << r.lp.constraints << " pivots=" << r.lp.pivots
            << "\n";
  std::cout << "  time_ms: " << r.elapsedMs << "\n";
}

const char* outcomeName(machine::OutcomeKind k) {
  switch (k) {
    case machine::OutcomeKind::Value: return "value";
    case machine::OutcomeKind::UnhandledEffect: return "unhandled_effect";
    case machine::OutcomeKind::ResourceExhausted: return "exhausted";
    case machine::OutcomeKind::RuntimeError: return "runtime_error";
  }
  return "?";
}

// analyze -------------------------------------------------------------------

struct AnalyzeArgs {
  std::string file, entry;
  bool tickCalls = false, tickHandlers = false, json = false, noTiming = false;
};

int cmdAnalyze(const AnalyzeArgs& a) {
  try {
    CoreProgram p = driver::loadProgram(a.file, {a.tickCalls, a.tickHandlers});
    auto cs = analysis::genConstraints(p);
    std::vector<std::string> names;
    if (!a.entry.empty()) {
      names.push_back(a.entry);
    } else {
      for (const auto& f : p.funs) names.push_back(f.name);
    }
    std::vector<analysis::AnalysisResult> results;
    for (const auto& n : names) results.push_back(analysis::inferBound(cs, p, n));
    bool anyUnsolvable = false;
    for (const auto& r : results) anyUnsolvable |= r.status != analysis::Status::Bounded;
    if (a.json) {
      ordered_json fs = ordered_json::array();
      for (const auto& r : results) fs.push_back(resultJson(r, !a.noTiming));
      std::cout << ordered_json{{"file", a.file}, {"functions", fs}}.dump(2) << "\n";
    } else {
      for (const auto& r : results) printResult(r);
    }
    return anyUnsolvable ? Unsolvable : Ok;
  } catch (const Error& e) {
    return fail(a.file, e);
  }
}

// run -----------------------------------------------------------------------

struct RunArgs {
  std::string file, entry, input, budget, trace;
  bool profile = false, json = false;
  std::uint64_t stepLimit = 0;
};

int cmdRun(const RunArgs& a) {
  try {
    CoreProgram p = driver::loadProgram(a.file);
    std::string entry = a.entry.empty() ? defaultEntry(p, a.file) : a.entry;
    const FunDecl* f = p.findFun(entry);
    if (!f) throw Error(ErrorKind::Scope, "no function named '" + entry + "'");
    ValueRef arg = surface::literalValue(surface::parseExpr(a.input), f->paramType);
    machine::Mode mode = machine::Mode::profiling();
    if (!a.budget.empty()) {
      auto b = parseRat(a.budget);
      if (!b || *b < 0) {
        std::cerr << "--budget expects a nonnegative rational\n";
        return Usage;
      }
      mode = machine::Mode::metered(*b);
    }
    machine::RunOptions ro;
    ro.stepLimit = a.stepLimit;
    std::ofstream trace;
    if (!a.trace.empty()) {
      trace.open(a.trace);
      if (!trace) {
        std::cerr << "cannot write trace '" << a.trace << "'\n";
        return Usage;
      }
      trace << "step,rule,resource,depth\n";
      ro.trace = &trace;
    }
    auto out = machine::runEntry(p, entry, arg, mode, ro);
    ordered_json j = {{"entry", entry}, {"outcome", outcomeName(out.kind)}};
    if (out.value) j["value"] = show(out.value);
    if (out.kind == machine::OutcomeKind::UnhandledEffect) j["label"] = out.label;
    if (out.stuck) j["stuck"] = machine::stuckName(*out.stuck);
    if (!out.detail.empty()) j["detail"] = out.detail;
    j["net"] = toString(out.net);
    j["high_water"] = toString(out.highWater);
    j["steps"] = out.steps;
    if (!mode.profile) j["remaining"] = toString(out.remaining);
    if (a.json) {
      std::cout << j.dump(2) << "\n";
    } else {
      for (const auto& [k, v] : j.items()) std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    }
    if (out.kind == machine::OutcomeKind::ResourceExhausted) return Exhausted;
    if (out.kind == machine::OutcomeKind::RuntimeError) return Usage;
    return Ok;
  } catch (const Error& e) {
    return fail(a.file, e);
  }
}

// verify --------------------------------------------------------------------

struct VerifyArgs {
  std::string file, entry, family;
  int trials = 100;
  std::uint64_t seed = 0x5eedULL;
  bool serial = false, checkStructure = false, json = false;
};

int cmdVerify(const VerifyArgs& a) {
  try {
    CoreProgram p = driver::loadProgram(a.file);
    std::string entry = a.entry.empty() ? defaultEntry(p, a.file) : a.entry;
    auto r = analysis::inferBound(p, entry);
    if (r.status != analysis::Status::Bounded) {
      std::cerr << entry << ": unsolvable, nothing to verify\n";
      return Unsolvable;
    }
    driver::VerifyOptions o;
    o.trials = a.trials;
    o.seed = a.seed;
    o.checkStructure = a.checkStructure;
    o.tightFamily = a.family;
    if (o.tightFamily.empty() && std::filesystem::exists(goldenPathFor(a.file))) {
      auto g = driver::parseGolden(driver::readFile(goldenPathFor(a.file)), entry);
      if (g.entry == entry) o.tightFamily = g.tightFamily;
    }
    if (!o.tightFamily.empty() && !driver::knownFamily(o.tightFamily)) {
      std::cerr << "unknown family '" << o.tightFamily << "'\n";
      return Usage;
    }
    auto rep = a.serial ? driver::verifySerial(p, r, o) : driver::verifyParallel(p, r, o);
    ordered_json bad = ordered_json::array();
    for (const auto& t : rep.records) {
      if (!t.violation()) continue;
      ordered_json v = {{"trial", t.index},
                        {"input", show(t.input)},
                        {"bound", toString(t.bound)},
                        {"high_water", toString(t.highWater)},
                        {"outcome", outcomeName(t.kind)}};
      if (t.stuck) v["stuck"] = machine::stuckName(*t.stuck);
      if (t.structuralViolations) v["structural_violations"] = t.structuralViolations;
      bad.push_back(v);
    }
    ordered_json j = {{"program", a.file},
                      {"entry", entry},
                      {"bound", r.bound.pretty()},
                      {"seed", rep.seed},
                      {"trials", rep.trials},
                      {"family", o.tightFamily},
                      {"min_slack", toString(rep.minSlack)},
                      {"violations", bad}};
    if (a.json) {
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "entry: " << entry << "\nbound: " << r.bound.pretty() << "\nseed: " << rep.seed
                << "\ntrials: " << rep.trials << "\nfamily: " << (o.tightFamily.empty() ? "-" : o.tightFamily)
                << "\nmin_slack: " << toString(rep.minSlack) << "\nviolations: " << bad.size() << "\n";
      for (const auto& v : bad)
        std::cout << "  trial " << v["trial"].get<int>() << ": input " << v["input"].get<std::string>()
                  << " high_water " << v["high_water"].get<std::string>() << " > bound "
                  << v["bound"].get<std::string>() << " (" << v["outcome"].get<std::string>() << ")\n";
    }
    return bad.empty() ? Ok : Unsound;
  } catch (const Error& e) {
    return fail(a.file, e);
  }
}

// bench ---------------------------------------------------------------------

struct BenchArgs {
  std::string dir = "corpus";
  int trials = 10;
  bool json = false, noTiming = false;
};

int cmdBench(const BenchArgs& a) {
  namespace fs = std::filesystem;
  std::vector<driver::Golden> goldens;
  try {
    goldens = driver::loadCorpus(a.dir);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return Usage;
  }
  for (const auto& e : fs::directory_iterator(a.dir)) {
    if (e.path().extension() != ".fx") continue;
    if (!fs::exists(fs::path(e.path()).replace_extension(".golden"))) {
      std::cerr << "missing golden for " << e.path().string() << "\n";
      return Usage;
    }
  }
  bool allMatch = true;
  ordered_json rows = ordered_json::array();
  for (const auto& g : goldens) {
    double total = 0;
    driver::EntryAnalysis an;
    for (int t = 0; t < std::max(a.trials, 1); ++t) {
      auto start = std::chrono::steady_clock::now();
      an = driver::analyzeEntry(g.programFile, g.entry);
      total += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    double avg = total / std::max(a.trials, 1);
    auto check = driver::checkGolden(g, an);
    allMatch &= check.ok;
    ordered_json row = {{"program", g.name}, {"entry", g.entry}};
    if (an.error) {
      row["status"] = "rejected";
      row["error"] = kindName(an.error->kind());
    } else {
      ordered_json res = resultJson(*an.result, false);
      for (const auto& [k, v] : res.items())
        if (k != "name") row[k] = v;
    }
    if (!a.noTiming) row["time_ms"] = avg;
    row["golden"] = check.ok ? "match" : "mismatch";
    if (!check.ok) row["mismatches"] = check.mismatches;
    rows.push_back(row);
  }
  if (a.json) {
    std::cout << ordered_json{{"corpus", a.dir}, {"trials", a.trials}, {"programs", rows}}.dump(2) << "\n";
  } else {
    for (const auto& r : rows) {
      std::cout << r["program"].get<std::string>() << " (" << r["entry"].get<std::string>()
                << "): " << r["status"].get<std::string>();
      if (r.contains("bound") && r["bound"].is_object()) std::cout << ", bound " << r["bound"]["pretty"].get<std::string>();
      if (r.contains("error")) std::cout << ", " << r["error"].get<std::string>();
      if (r.contains("time_ms")) std::cout << ", " << r["time_ms"].get<double>() << " ms";
      std::cout << ", golden " << r["golden"].get<std::string>() << "\n";
      if (r.contains("mismatches"))
        for (const auto& m : r["mismatches"]) std::cout << "    " << m.get<std::string>() << "\n";
    }
  }
  return allMatch ? Ok : Mismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resource bound analysis for a language with effects and handlers"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Infer resource bounds");
  analyze->add_option("file", an.file, "Program file")->required();
  analyze->add_option("--entry", an.entry, "Analyze only this function");
  analyze->add_flag("--tick-calls", an.tickCalls, "Charge 1 per function call");
  analyze->add_flag("--tick-handlers", an.tickHandlers, "Charge 1 per handler branch");
  analyze->add_flag("--json", an.json, "JSON report");
  analyze->add_flag("--no-timing", an.noTiming, "Omit timings from JSON");

  RunArgs ru;
  auto* run = app.add_subcommand("run", "Run a function on an input");
  run->add_option("file", ru.file, "Program file")->required();
  run->add_option("--entry", ru.entry, "Function to run");
  run->add_option("--input", ru.input, "Argument literal")->required();
  auto* budget = run->add_option("--budget", ru.budget, "Metered run with this many resource units");
  auto* profile = run->add_flag("--profile", ru.profile, "Profile run (default)");
  budget->excludes(profile);
  run->add_option("--trace", ru.trace, "Write a CSV trace");
  run->add_option("--step-limit", ru.stepLimit, "Step limit (default AARA_FX_STEP_LIMIT or 10^7)");
  run->add_flag("--json", ru.json, "JSON output");

  VerifyArgs ve;
  auto* verify = app.add_subcommand("verify", "Check the bound against random runs");
  verify->add_option("file", ve.file, "Program file")->required();
  verify->add_option("--entry", ve.entry, "Function to verify");
  verify->add_option("--trials", ve.trials, "Number of inputs")->check(CLI::NonNegativeNumber);
  verify->add_option("--seed", ve.seed, "PRNG seed");
  verify->add_option("--family", ve.family, "Input family mixed into the trials");
  verify->add_flag("--serial", ve.serial, "Run trials on one thread");
  verify->add_flag("--check-structure", ve.checkStructure, "Check every machine state structurally");
  verify->add_flag("--json", ve.json, "JSON report");

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Analyze the corpus and compare with goldens");
  bench->add_option("dir", be.dir, "Corpus directory");
  bench->add_option("--trials", be.trials, "Timing repetitions")->check(CLI::PositiveNumber);
  bench->add_flag("--json", be.json, "JSON report");
  bench->add_flag("--no-timing", be.noTiming, "Omit timings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? Ok : Usage;
  }
  if (*analyze) return cmdAnalyze(an);
  if (*run) return cmdRun(ru);
  if (*verify) return cmdVerify(ve);
  if (*bench) return cmdBench(be);
  return Usage;
}
