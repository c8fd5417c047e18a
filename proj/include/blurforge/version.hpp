#pragma once

namespace blurforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace blurforge
