#pragma once

namespace stragglers {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stragglers
