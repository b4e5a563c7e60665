#pragma once

namespace darkpath {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace darkpath
