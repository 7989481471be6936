#pragma once

namespace urbannav {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kConfigVersion = 1;

// Schema tags stamped on the first line of every CSV artifact.
inline constexpr const char* kResultsSchema = "# urbannav-results v1";
inline constexpr const char* kSummarySchema = "# urbannav-summary v1";
inline constexpr const char* kCurvesSchema = "# urbannav-curves v1";

} // namespace urbannav
