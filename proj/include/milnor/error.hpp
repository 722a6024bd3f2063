#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace milnor {

enum class ErrorKind {
  SyntaxError,
  UnknownVariable,
  NegativeExponent,
  DimensionMismatch,
  NonFinite,
  InvalidTolerance,
  NoConvergence,
  InvalidRho,
  PreconditionNotMet,
  GradientVanishesOnSphere,
  DegreeDisagreement,
  InvalidInput,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::NegativeExponent: return "NegativeExponent";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InvalidTolerance: return "InvalidTolerance";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InvalidRho: return "InvalidRho";
    case ErrorKind::PreconditionNotMet: return "PreconditionNotMet";
    case ErrorKind::GradientVanishesOnSphere: return "GradientVanishesOnSphere";
    case ErrorKind::DegreeDisagreement: return "DegreeDisagreement";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` tells callers what failed.
/// `position()` is meaningful for SyntaxError only (byte offset into the input).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::size_t position = npos)
      : std::runtime_error(message), kind_(kind), position_(position) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }
  bool has_position() const noexcept { return position_ != npos; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  ErrorKind kind_;
  std::size_t position_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace milnor
