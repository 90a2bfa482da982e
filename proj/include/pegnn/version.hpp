#pragma once

namespace pegnn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pegnn
