#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aara/syntax.hpp"

namespace aara::machine {

enum class Focus { Eval, Return, Propagate };

struct Mode {
  bool profile = true;
  Rat budget;  // metered only
  static Mode profiling() { return {true, 0}; }
  static Mode metered(Rat b) { return {false, std::move(b)}; }
};

struct State {
  std::vector<Frame> stack;  // top at the back
  Focus focus = Focus::Eval;
  CompRef comp;              // Eval
  ValueRef value;            // Return, Propagate payload
  std::string label;         // Propagate
  std::deque<Frame> captured;  // Propagate: bottom first
  bool metered = false;
  Rat resource;              // metered: what is left
  Rat net, highWater;        // profile counters (also tracked when metered)
  EffectSet ambient;         // effects the empty stack lets escape
};

enum class StuckReason { OneShotViolation, UnhandledPrimitive, StepLimit };
const char* stuckName(StuckReason r);

struct StepResult {
  enum class Kind { Next, Final, Exhausted, Stuck } kind = Kind::Next;
  const char* rule = "";
  StuckReason reason = StuckReason::UnhandledPrimitive;
  std::string detail;
};

/// Throws Error(OpenTerm) if `e` has free variables.
State initState(const CompRef& e, const Mode& m);

/// One transition. On Final the state is either `ε ◁ v` or `ε ◀ (ℓ, v, k')`.
StepResult step(State& s, const CoreProgram& p);

enum class OutcomeKind { Value, UnhandledEffect, ResourceExhausted, RuntimeError };

struct Outcome {
  OutcomeKind kind = OutcomeKind::Value;
  ValueRef value;          // Value, UnhandledEffect payload
  std::string label;       // UnhandledEffect
  std::optional<StuckReason> stuck;  // RuntimeError
  std::string detail;
  Rat net, highWater;
  Rat remaining;           // metered
  std::uint64_t steps = 0;
  std::uint64_t exhaustedAt = 0;
  std::uint64_t structuralViolations = 0;
  std::string firstViolation;
};

struct RunOptions {
  std::uint64_t stepLimit = 0;  // 0: defaultStepLimit()
  std::ostream* trace = nullptr;  // CSV `step,rule,resource,depth`
  bool checkStructure = false;  // per-step structural oracle
  /// Called on every state reached (after each step), e.g. to harvest stacks.
  std::function<void(const State&)> observe;
  /// Effects the computation may leave unhandled (runEntry: the entry's).
  std::optional<EffectSet> ambient;
};

/// 10^7, or AARA_FX_STEP_LIMIT when set.
std::uint64_t defaultStepLimit();

Outcome run(const CoreProgram& p, const CompRef& e, const Mode& m, const RunOptions& opts = {});

/// Runs `entry arg`.
Outcome runEntry(const CoreProgram& p, const std::string& entry, const ValueRef& arg,
                 const Mode& m, const RunOptions& opts = {});

// Structural state typing ---------------------------------------------------

/// Type a stack segment (bottom first) hands to the frame below it, and the
/// type/effects it accepts on top.
struct SegmentType {
  STypeRef accepts;
  EffectSet effects;
};

/// Checks a segment whose bottom frame must produce `out` under ambient
/// effects `outEffects`. Returns the violation, or fills `result`.
std::optional<std::string> checkSegment(const std::vector<Frame>& frames, const STypeRef& out,
                                        const EffectSet& outEffects, SegmentType* result);

/// Potential-erased stack and state typing. Returns the first violation.
std::optional<std::string> checkStateStructure(const State& s, const CoreProgram& p);

/// Structural type of a closed value, when it can be read off.
STypeRef typeOfValue(const ValueRef& v);

}  // namespace aara::machine
