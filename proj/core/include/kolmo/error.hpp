#pragma once

#include <stdexcept>
#include <string>

namespace kolmo {

enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  GridIncompatible,
  DegeneratePhase,
  IndicatorDegenerate,
  ShapeMismatch,
  DegenerateData,
  TooShort,
  EmptyData,
  BinMismatch,
  HorizonOutOfRange,
  SingleClass,
  Format,
  VersionMismatch,
  Io,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace kolmo
