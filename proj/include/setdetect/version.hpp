#pragma once

namespace setdetect {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace setdetect
