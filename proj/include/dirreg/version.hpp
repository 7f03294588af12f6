#pragma once

namespace dirreg {

inline constexpr const char* kToolName = "dirreg";
inline constexpr const char* kToolVersion = "1.0.0";

} // namespace dirreg
