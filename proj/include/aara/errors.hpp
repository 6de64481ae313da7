#pragma once

#include <stdexcept>
#include <string>

#include "aara/syntax.hpp"

namespace aara {

enum class ErrorKind {
  StructuralMismatch,
  LinearInZero,
  Syntax,
  DuplicateName,
  UnknownEffectLabel,
  Scope,
  Type,
  LinearReuse,
  EffectNotInSignature,
  UnhandledLabelNotDeclared,
  LinearContextInHandler,
  Unsupported,
  OpenTerm,
  UnboundVar,
  Internal,
};

const char* kindName(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg, SrcPos pos = {})
      : std::runtime_error(msg), kind_(kind), pos_(pos) {}

  ErrorKind kind() const { return kind_; }
  SrcPos pos() const { return pos_; }
  /// `line:col: Kind: message` (position omitted when unknown).
  std::string diagnostic() const;

 private:
  ErrorKind kind_;
  SrcPos pos_;
};

}  // namespace aara
