#include "eqderiv/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

namespace eqderiv {

namespace {

// std::uint64_t and std::size_t coincide here, so seed uses the size_t slot.
static_assert(std::is_same_v<std::uint64_t, std::size_t>);
using Field = std::variant<double GenConfig::*, int GenConfig::*, std::size_t GenConfig::*, unsigned GenConfig::*,
                           bool GenConfig::*, std::string GenConfig::*>;

const std::vector<std::pair<std::string_view, Field>>& fields() {
  static const std::vector<std::pair<std::string_view, Field>> table = {
      {"p_history", &GenConfig::p_history},
      {"p_arity_0", &GenConfig::p_arity_0},
      {"p_renaming", &GenConfig::p_renaming},
      {"p_arity_1", &GenConfig::p_arity_1},
      {"p_evaluate", &GenConfig::p_evaluate},
      {"p_arity_2", &GenConfig::p_arity_2},
      {"p_int_or_diff", &GenConfig::p_int_or_diff},
      {"p_subs", &GenConfig::p_subs},
      {"diff_share", &GenConfig::diff_share},
      {"p_basic", &GenConfig::p_basic},
      {"p_extension", &GenConfig::p_extension},
      {"p_add_eq", &GenConfig::p_add_eq},
      {"p_new_premise", &GenConfig::p_new_premise},
      {"p_define", &GenConfig::p_define},
      {"length_mean", &GenConfig::length_mean},
      {"length_sigma", &GenConfig::length_sigma},
      {"length_min", &GenConfig::length_min},
      {"length_max", &GenConfig::length_max},
      {"max_latex_chars", &GenConfig::max_latex_chars},
      {"max_prompt_tokens", &GenConfig::max_prompt_tokens},
      {"retry_cap", &GenConfig::retry_cap},
      {"iteration_cap", &GenConfig::iteration_cap},
      {"attempt_cap", &GenConfig::attempt_cap},
      {"extensions", &GenConfig::extensions},
      {"vocabulary_path", &GenConfig::vocabulary_path},
      {"seed", &GenConfig::seed},
      {"threads", &GenConfig::threads},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

template <>
double parse_number<double>(const std::string& key, const std::string& value) {
  // gcc 11 has no floating-point from_chars.
  std::istringstream is(value);
  is.imbue(std::locale::classic());
  double out = 0;
  if (!(is >> out) || !is.eof()) throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

}  // namespace

void set_config_value(GenConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name != key) continue;
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(cfg.*member)>;
          if constexpr (std::is_same_v<T, std::string>) {
            cfg.*member = value;
          } else if constexpr (std::is_same_v<T, bool>) {
            if (value == "true" || value == "1") {
              cfg.*member = true;
            } else if (value == "false" || value == "0") {
              cfg.*member = false;
            } else {
              throw ConfigError("bad value for " + key + ": '" + value + "'");
            }
          } else {
            cfg.*member = parse_number<T>(key, value);
          }
        },
        field);
    return;
  }
  throw ConfigError("unknown key: " + key);
}

GenConfig parse_config(std::string_view text, GenConfig cfg) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

GenConfig load_config(const std::string& path, GenConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string dump_config(const GenConfig& cfg) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  for (const auto& [name, field] : fields()) {
    os << name << " = ";
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(cfg.*member)>;
          if constexpr (std::is_same_v<T, bool>) {
            os << (cfg.*member ? "true" : "false");
          } else {
            os << cfg.*member;
          }
        },
        field);
    os << '\n';
  }
  return os.str();
}

}  // namespace eqderiv
