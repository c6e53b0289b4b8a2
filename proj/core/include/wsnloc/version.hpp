#pragma once

namespace wsnloc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wsnloc
