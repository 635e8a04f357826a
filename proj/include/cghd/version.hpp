#pragma once

namespace cghd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cghd
