#pragma once

#include <stdexcept>
#include <string>

namespace eventflux {

enum class ErrorKind {
  Malformed,   // byte-level layout problems (lengths, truncation)
  Bounds,      // decoded coordinates outside the sensor
  Encoding,    // value not representable in the target format
  Parse,       // text formats
  Format,      // container magic / structure
  Config,      // kernel / representation configuration
  Degenerate,  // mathematically undefined input (zero window, zero norm, ...)
  Argument,    // caller violated a precondition
  Io,          // filesystem
};

const char* to_string(ErrorKind kind) noexcept;

/// Every library failure is reported as an Error; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace eventflux
