#include "json_lines_config.hpp"

#include <map>

#include <nlohmann/json.hpp>

namespace consroute::cli {

namespace {

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

}  // namespace

std::string JsonLinesConfig::to_config(const CLI::App* app, bool default_also, bool,
                                       std::string) const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty() || opt->get_configurable() == false) continue;
    const std::string& name = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& res = opt->results();
      j[name] = res.size() == 1 ? nlohmann::ordered_json(res.front()) : nlohmann::ordered_json(res);
    } else if (default_also && !opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    }
  }
  return j.dump() + "\n";
}

std::vector<CLI::ConfigItem> JsonLinesConfig::from_config(std::istream& in) const {
  // Later lines override earlier ones key by key.
  std::map<std::string, std::vector<std::string>> merged;
  std::vector<std::string> order;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw CLI::ConfigError("config line " + std::to_string(lineno) + " is not a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
      std::vector<std::string> inputs;
      if (value.is_array()) {
        for (const auto& v : value) inputs.push_back(scalar_text(v));
      } else {
        inputs.push_back(scalar_text(value));
      }
      if (!merged.count(key)) order.push_back(key);
      merged[key] = std::move(inputs);
    }
  }
  std::vector<CLI::ConfigItem> items;
  for (const auto& key : order) {
    CLI::ConfigItem item;
    item.name = key;
    item.inputs = merged[key];
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace consroute::cli
