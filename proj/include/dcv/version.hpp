#pragma once

namespace dcv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dcv
