#include "consroute/types.hpp"

#include <string>

#include "consroute/error.hpp"

namespace consroute {

std::string_view to_string(TierId tier) {
  switch (tier) {
    case TierId::device: return "device";
    case TierId::edge: return "edge";
    case TierId::cloud: return "cloud";
  }
  return "?";
}

TierId tier_from_string(std::string_view name) {
  if (name == "device" || name == "DEVICE" || name == "dlm") return TierId::device;
  if (name == "edge" || name == "EDGE" || name == "elm") return TierId::edge;
  if (name == "cloud" || name == "CLOUD" || name == "clm") return TierId::cloud;
  throw Error(ErrorKind::invalid_config, "unknown tier '" + std::string(name) + "'");
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::duplicate_id: return "duplicate_id";
    case ErrorKind::out_of_range: return "out_of_range";
    case ErrorKind::missing_score: return "missing_score";
    case ErrorKind::missing_tier: return "missing_tier";
    case ErrorKind::invalid_config: return "invalid_config";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::training_diverged: return "training_diverged";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace consroute
