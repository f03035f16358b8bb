#pragma once

namespace matsketch {

inline constexpr const char* kToolName = "matsketch";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSidecarSchemaVersion = 1;

} // namespace matsketch
