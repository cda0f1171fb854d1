#pragma once

namespace wedgelab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wedgelab
