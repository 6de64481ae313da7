#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aara/analysis.hpp"
#include "aara/elaborate.hpp"
#include "aara/errors.hpp"
#include "aara/machine.hpp"

namespace aara::driver {

std::string readFile(const std::string& path);

/// Full pipeline on a file. Throws Error.
CoreProgram loadProgram(const std::string& path, CostMetric m = {});

/// The pipeline without the sharing pass, so linearity is never checked.
CoreProgram elaborateUnchecked(std::string_view source, CostMetric m = {});

// Random inputs -------------------------------------------------------------

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n);
  std::int64_t range(std::int64_t lo, std::int64_t hi);  // inclusive

 private:
  std::uint64_t state_;
};

/// Independent stream for trial `i` of a run seeded with `seed`.
std::uint64_t trialSeed(std::uint64_t seed, std::uint64_t i);

struct InputShape {
  int maxLen = 32;
  std::int64_t intMin = -9, intMax = 9;
  bool nonzero = false;
};

/// Random closed value of a structural type. Function-typed positions are
/// filled with a declared function of that exact type.
ValueRef randomValue(const STypeRef& t, SplitMix64& rng, const CoreProgram& p, const InputShape& s = {});

/// Inputs from a named family: `any`, `equal_lengths` (pair of lists of one
/// length), `uniform_inner` (list of lists all as long as the second
/// component), `nonzero` (no zero integers).
ValueRef familyValue(const std::string& family, const STypeRef& t, SplitMix64& rng,
                     const CoreProgram& p, int maxLen = 32);
bool knownFamily(const std::string& family);

// Goldens -------------------------------------------------------------------

struct Golden {
  std::string name;         // file stem
  std::string programFile;  // <dir>/<name>.fx
  std::string entry;
  std::string status;       // bounded | unsolvable | rejected
  std::string error;        // rejected: error kind name
  std::string signature;    // optional exact signature text
  std::string bound;        // optional exact bound text
  std::vector<std::pair<std::string, std::string>> anns;  // name -> position
  std::vector<std::string> constraints;                   // `lhs==rhs`
  std::string tightFamily;
};

/// Throws Error(Syntax) on malformed text.
Golden parseGolden(std::string_view text, const std::string& name);

/// Every `<name>.golden` in `dir`, sorted by name. Throws Error(Syntax).
std::vector<Golden> loadCorpus(const std::string& dir);

/// Reads an annotation off a signature. Positions: `p`, `p'`, or a path
/// rooted at `arg` or `res` using `.1`, `.2`, `[]`, `.inl`, `.inr`, where
/// `[]` and `.inl`/`.inr` select the element or variant annotation.
Rat annotationAt(const Arrow& sig, std::string_view position);

struct EntryAnalysis {
  std::optional<analysis::AnalysisResult> result;
  std::optional<Error> error;
  CoreProgram program;
};

EntryAnalysis analyzeEntry(const std::string& file, const std::string& entry, CostMetric m = {});

struct GoldenCheck {
  bool ok = true;
  std::vector<std::string> mismatches;
};

GoldenCheck checkGolden(const Golden& g, const EntryAnalysis& a);

// Empirical soundness -------------------------------------------------------

struct VerifyOptions {
  int trials = 100;
  std::uint64_t seed = 0x5eedULL;
  /// Every fourth trial is drawn from this family when set.
  std::string tightFamily;
  bool checkStructure = false;
};

struct TrialRecord {
  int index = 0;
  ValueRef input;
  Rat bound, highWater, net;
  machine::OutcomeKind kind = machine::OutcomeKind::Value;
  std::optional<machine::StuckReason> stuck;
  std::uint64_t structuralViolations = 0;
  bool fromFamily = false;
  bool violation() const;
};

struct VerifyReport {
  std::string entry;
  std::uint64_t seed = 0;
  int trials = 0;
  Rat minSlack;
  std::vector<TrialRecord> records;  // by trial index
  int violations() const;
  std::uint64_t structuralViolations() const;
};

VerifyReport verifySerial(const CoreProgram& p, const analysis::AnalysisResult& r, const VerifyOptions& o);
VerifyReport verifyParallel(const CoreProgram& p, const analysis::AnalysisResult& r, const VerifyOptions& o);

}  // namespace aara::driver
