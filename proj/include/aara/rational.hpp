#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace aara {

/// Exact rational number. All potential annotations, tick amounts and LP
/// coefficients use this type; there is no floating-point path anywhere.
using Rat = mpq_class;

/// Prints `a/b`, or `a` when the denominator is 1.
std::string toString(const Rat& q);

/// Accepts `n`, `n/d` and a leading `-`. Returns nullopt on malformed input
/// or a zero denominator.
std::optional<Rat> parseRat(std::string_view text);

}  // namespace aara
