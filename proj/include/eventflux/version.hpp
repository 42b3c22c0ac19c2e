#pragma once

namespace eventflux {

inline constexpr const char* kVersion = "0.3.0";

inline const char* version() noexcept { return kVersion; }

}  // namespace eventflux
