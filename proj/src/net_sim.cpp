#include "consroute/net_sim.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "consroute/error.hpp"

namespace consroute {

void LinkProfile::validate() const {
  if (!(downlink_kbps > 0.0) || !(uplink_kbps > 0.0)) {
    throw Error(ErrorKind::invalid_config, "link bandwidths must be positive");
  }
  if (!(loss_rate >= 0.0 && loss_rate < 1.0)) {
    throw Error(ErrorKind::invalid_config, "loss rate must lie in [0, 1)");
  }
  if (!(oneway_down_ms >= 0.0) || !(oneway_up_ms >= 0.0) || !(dns_ms >= 0.0) ||
      !std::isfinite(oneway_down_ms + oneway_up_ms + dns_ms + downlink_kbps + uplink_kbps)) {
    throw Error(ErrorKind::invalid_config, "link delays must be finite and nonnegative");
  }
}

void NetworkScenario::validate() const {
  links.edge.validate();
  links.cloud.validate();
  if (switch_at.has_value() != after.has_value()) {
    throw Error(ErrorKind::invalid_config, "scenario switch needs both switch_at and a post-switch link pair");
  }
  if (after) {
    after->edge.validate();
    after->cloud.validate();
  }
}

LinkPair good_links() {
  return {{10000.0, 5000.0, 0.001, 40.0, 20.0, 50.0}, {8000.0, 4000.0, 0.001, 80.0, 40.0, 70.0}};
}

LinkPair bad_links() {
  return {{2000.0, 500.0, 0.01, 120.0, 80.0, 200.0}, {800.0, 200.0, 0.03, 250.0, 200.0, 400.0}};
}

std::map<std::string, NetworkScenario> builtin_profiles() {
  std::map<std::string, NetworkScenario> out;
  out["good"] = {"good", good_links(), std::nullopt, std::nullopt};
  out["bad"] = {"bad", bad_links(), std::nullopt, std::nullopt};
  out["bad2good"] = {"bad2good", bad_links(), 7, good_links()};
  return out;
}

NetworkScenario builtin_scenario(const std::string& name, std::optional<std::size_t> switch_at) {
  auto all = builtin_profiles();
  auto it = all.find(name);
  if (it == all.end()) {
    throw Error(ErrorKind::invalid_config, "unknown network profile '" + name + "'");
  }
  NetworkScenario s = it->second;
  if (switch_at) {
    if (!s.after) throw Error(ErrorKind::invalid_config, "profile '" + name + "' does not switch");
    s.switch_at = switch_at;
  }
  return s;
}

double round_trip_latency(const LinkProfile& link, std::uint64_t request_bytes,
                          std::uint64_t response_bytes) {
  const double keep = 1.0 - link.loss_rate;
  // kbps is bits per millisecond, so the transfer terms come out in ms.
  const double up_ms = static_cast<double>(request_bytes) * 8.0 / (link.uplink_kbps * keep);
  const double down_ms = static_cast<double>(response_bytes) * 8.0 / (link.downlink_kbps * keep);
  return (link.dns_ms + link.oneway_up_ms + link.oneway_down_ms + up_ms + down_ms) / 1000.0;
}

const LinkProfile& scenario_link(const NetworkScenario& s, TierId tier, std::size_t window) {
  if (tier == TierId::device) {
    throw Error(ErrorKind::invalid_config, "the device tier has no network link");
  }
  const LinkPair& pair = (s.switch_at && s.after && window >= *s.switch_at) ? *s.after : s.links;
  return tier == TierId::edge ? pair.edge : pair.cloud;
}

namespace {

LinkProfile link_from_json(const nlohmann::json& j, LinkProfile base) {
  base.downlink_kbps = j.value("downlink_kbps", base.downlink_kbps);
  base.uplink_kbps = j.value("uplink_kbps", base.uplink_kbps);
  base.loss_rate = j.value("loss_rate", base.loss_rate);
  base.oneway_down_ms = j.value("oneway_down_ms", base.oneway_down_ms);
  base.oneway_up_ms = j.value("oneway_up_ms", base.oneway_up_ms);
  base.dns_ms = j.value("dns_ms", base.dns_ms);
  return base;
}

}  // namespace

NetworkScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open scenario file " + path.string());
  NetworkScenario s{path.stem().string(), good_links(), std::nullopt, std::nullopt};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw ParseError(lineno, "scenario line is not a JSON object");
      if (j.contains("name")) s.name = j.at("name").get<std::string>();
      if (j.contains("edge")) s.links.edge = link_from_json(j.at("edge"), s.links.edge);
      if (j.contains("cloud")) s.links.cloud = link_from_json(j.at("cloud"), s.links.cloud);
      if (j.contains("switch_at")) s.switch_at = j.at("switch_at").get<std::size_t>();
      if (j.contains("after_edge") || j.contains("after_cloud")) {
        if (!s.after) s.after = s.links;
        if (j.contains("after_edge")) s.after->edge = link_from_json(j.at("after_edge"), s.after->edge);
        if (j.contains("after_cloud")) s.after->cloud = link_from_json(j.at("after_cloud"), s.after->cloud);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  s.validate();
  return s;
}

}  // namespace consroute
