#pragma once

namespace clreserve {

inline constexpr const char* kToolName = "clreserve";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace clreserve
