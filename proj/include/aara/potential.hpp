#pragma once

#include "aara/syntax.hpp"
#include "aara/types.hpp"

namespace aara {

/// Φ(v : τ) for a closed value. The top-level `pot` of an AnnType is context
/// potential and is never included; callers add it where needed.
/// Throws Error(StructuralMismatch) when v does not inhabit τ.
Rat potential(const ValueRef& v, const TypeRef& t);
inline Rat potential(const ValueRef& v, const AnnType& a) { return potential(v, a.type); }

/// ⌊τ⌋: every annotation set to 0; Fun templates are left alone.
/// Throws Error(LinearInZero) if a linear function type occurs.
TypeRef zero(const TypeRef& t);
AnnType zero(const AnnType& a);

/// True iff zero(τ) is defined and equals τ.
bool isPotentialFree(const TypeRef& t);
bool isPotentialFree(const AnnType& a);

}  // namespace aara
