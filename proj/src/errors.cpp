#include "aara/errors.hpp"

namespace aara {

const char* kindName(ErrorKind k) {
  switch (k) {
    case ErrorKind::StructuralMismatch: return "StructuralMismatch";
    case ErrorKind::LinearInZero: return "LinearInZero";
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::UnknownEffectLabel: return "UnknownEffectLabel";
    case ErrorKind::Scope: return "ScopeError";
    case ErrorKind::Type: return "TypeError";
    case ErrorKind::LinearReuse: return "LinearReuse";
    case ErrorKind::EffectNotInSignature: return "EffectNotInSignature";
    case ErrorKind::UnhandledLabelNotDeclared: return "UnhandledLabelNotDeclared";
    case ErrorKind::LinearContextInHandler: return "LinearContextInHandler";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::OpenTerm: return "OpenTerm";
    case ErrorKind::UnboundVar: return "UnboundVar";
    case ErrorKind::Internal: return "InternalError";
  }
  return "Error";
}

std::string Error::diagnostic() const {
  std::string s;
  if (pos_.line > 0) s = std::to_string(pos_.line) + ":" + std::to_string(pos_.col) + ": ";
  return s + kindName(kind_) + ": " + what();
}

}  // namespace aara
