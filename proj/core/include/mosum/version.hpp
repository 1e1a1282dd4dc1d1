#pragma once

namespace mosum {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace mosum
