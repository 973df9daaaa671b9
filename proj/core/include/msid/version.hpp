#pragma once

namespace msid {

inline constexpr const char* kVersion = "0.1.0";

} // namespace msid
