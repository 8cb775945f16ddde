#pragma once

namespace consroute {
inline constexpr const char* kVersion = "0.1.0";
}
