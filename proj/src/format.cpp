#include "consroute/format.hpp"

#include <charconv>

namespace consroute {

std::string fmt_real(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace consroute
