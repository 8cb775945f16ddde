#pragma once

#include <string>

namespace consroute {

// Shortest decimal that parses back to the same double.
std::string fmt_real(double v);

}  // namespace consroute
