#pragma once

namespace gcte {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace gcte
