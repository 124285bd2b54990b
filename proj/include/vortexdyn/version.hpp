#pragma once

namespace vortexdyn {
inline constexpr const char* kVersion = "0.1.0";
}
