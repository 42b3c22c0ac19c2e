#include "eventflux/error.hpp"

namespace eventflux {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Malformed: return "malformed";
    case ErrorKind::Bounds: return "bounds";
    case ErrorKind::Encoding: return "encoding";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Format: return "format";
    case ErrorKind::Config: return "config";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace eventflux
