#pragma once

namespace cascop {

inline constexpr const char* version_string = "0.1.0";

}  // namespace cascop
