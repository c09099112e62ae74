#pragma once

namespace fembv {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kFitFormatVersion = "fembv-gpd-fit/1";
inline constexpr const char* kCsvFormatVersion = "fembv-gpd-csv/1";

}  // namespace fembv
