#pragma once

#include <string>
#include <string_view>

#include "aara/surface.hpp"
#include "aara/syntax.hpp"

namespace aara {

/// Scope check, structural type inference and A-normalisation into the
/// fine-grain core. Functions come out ordered callee-first.
/// Throws Error(Scope | Type | EffectNotInSignature | Unsupported).
CoreProgram lowerToFineGrain(const surface::SurfaceProgram& p);

/// Replaces Raise/Try by operations on the `Exc` label and handlers.
CoreProgram desugarExceptions(const CoreProgram& p);

/// Makes every non-function variable occur at most once per control path by
/// inserting Share nodes. Throws Error(LinearReuse) for linear functions.
CoreProgram insertSharing(const CoreProgram& p);

struct CostMetric {
  bool tickCalls = false;     // tick 1 before every call (not continuation resumption)
  bool tickHandlers = false;  // tick 1 at the start of every handler branch
};

CoreProgram insertTicks(const CoreProgram& p, CostMetric m);

/// True iff every variable that is not of function type occurs at most once
/// on every control path. On failure `why` names the offending variable.
bool isSyntacticallyLinear(const CoreProgram& p, std::string* why = nullptr);

/// parse, lower, desugar, share, tick.
CoreProgram elaborate(std::string_view source, CostMetric m = {});
CoreProgram elaborate(const surface::SurfaceProgram& p, CostMetric m = {});

}  // namespace aara
