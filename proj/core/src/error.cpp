#include "kolmo/error.hpp"

namespace kolmo {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::GridIncompatible: return "GridIncompatible";
    case ErrorKind::DegeneratePhase: return "DegeneratePhase";
    case ErrorKind::IndicatorDegenerate: return "IndicatorDegenerate";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::BinMismatch: return "BinMismatch";
    case ErrorKind::HorizonOutOfRange: return "HorizonOutOfRange";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::Format: return "Format";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace kolmo
