#pragma once

namespace netobj {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace netobj
