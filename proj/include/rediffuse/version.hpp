#pragma once

namespace rediffuse {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rediffuse
