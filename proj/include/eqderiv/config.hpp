#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "eqderiv/generator.hpp"

namespace eqderiv {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "key = value" lines; '#' starts a comment. Keys are the GenConfig field
/// names. Unknown keys and malformed values throw ConfigError with the line.
GenConfig parse_config(std::string_view text, GenConfig base = {});
GenConfig load_config(const std::string& path, GenConfig base = {});

/// Sets one field by name.
void set_config_value(GenConfig& cfg, const std::string& key, const std::string& value);

/// Every field as "key = value" lines in declaration order; parse_config
/// reads it back to an equal config.
std::string dump_config(const GenConfig& cfg);

}  // namespace eqderiv
