#pragma once

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace consroute::cli {

// Config files hold one JSON object per line, merged in order. Keys are long
// option names; arrays become repeated values.
class JsonLinesConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override;
};

}  // namespace consroute::cli
