#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "onramp/types.hpp"

namespace onramp {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Parses `key = value` lines; `#` starts a comment. Keys missing from the
/// text keep their ScenarioConfig defaults. Unknown keys and malformed values
/// are errors.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Writes every key, so parse_scenario(format_scenario(c)) == c.
std::string format_scenario(const ScenarioConfig& cfg);

}  // namespace onramp
