#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "consroute/types.hpp"

namespace consroute {

struct LinkProfile {
  double downlink_kbps = 1.0;
  double uplink_kbps = 1.0;
  double loss_rate = 0.0;
  double oneway_down_ms = 0.0;
  double oneway_up_ms = 0.0;
  double dns_ms = 0.0;

  void validate() const;
  bool operator==(const LinkProfile&) const = default;
};

struct LinkPair {
  LinkProfile edge;
  LinkProfile cloud;
  bool operator==(const LinkPair&) const = default;
};

struct NetworkScenario {
  std::string name;
  LinkPair links;
  // Windows with index >= switch_at use `after`.
  std::optional<std::size_t> switch_at;
  std::optional<LinkPair> after;

  void validate() const;
};

LinkPair good_links();
LinkPair bad_links();

// "good", "bad" and "bad2good" (switching at window 7).
std::map<std::string, NetworkScenario> builtin_profiles();
NetworkScenario builtin_scenario(const std::string& name,
                                 std::optional<std::size_t> switch_at = std::nullopt);

// Expected end-to-end seconds for one request over the link. Loss inflates
// transfer time by 1/(1 - loss).
double round_trip_latency(const LinkProfile& link, std::uint64_t request_bytes,
                          std::uint64_t response_bytes);

// Throws Error(invalid_config) for the device tier, which has no link.
const LinkProfile& scenario_link(const NetworkScenario& scenario, TierId tier, std::size_t window);

// One JSON object per line; later lines override earlier keys. Keys: name,
// edge, cloud, switch_at, after_edge, after_cloud; links use the LinkProfile
// field names.
NetworkScenario load_scenario(const std::filesystem::path& path);

}  // namespace consroute
