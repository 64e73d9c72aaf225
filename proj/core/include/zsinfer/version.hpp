#pragma once

namespace zsinfer {

inline constexpr const char* kToolkitName = "zsinfer";
inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace zsinfer
