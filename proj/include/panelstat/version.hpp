#pragma once

namespace panelstat {

inline constexpr const char* kVersion = "1.0.0";

// Identifier of the fixed pseudo-random generator algorithm. Seeds plus
// this id fully determine every random draw the toolkit makes.
inline constexpr const char* kPrngId = "splitmix64";

}  // namespace panelstat
