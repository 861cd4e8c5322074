#pragma once

namespace delib {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace delib
