#pragma once

// TOML helpers shared by the scenario and experiment readers.

#include <string>
#include <vector>

#include <toml.hpp>

#include "momentid/errors.hpp"
#include "momentid/model.hpp"

namespace momentid::detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ParseError, where + ": " + what);
}

inline double number_at(const toml::node& node, const std::string& where) {
  if (auto v = node.value<double>()) return *v;
  schema_error(where, "expected a number");
}

inline std::vector<double> numbers_at(const toml::node& node, const std::string& where) {
  const auto* arr = node.as_array();
  if (!arr) schema_error(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    out.push_back(number_at(*arr->get(i), where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline std::string string_at(const toml::node& node, const std::string& where) {
  if (auto v = node.value<std::string>()) return *v;
  schema_error(where, "expected a string");
}

inline const toml::table& table_at(const toml::node& node, const std::string& where) {
  const auto* t = node.as_table();
  if (!t) schema_error(where, "expected a table");
  return *t;
}

inline NoiseSpec noise_from(const toml::node& node, const std::string& where) {
  const auto& t = table_at(node, where);
  const auto* fam = t.get("family");
  if (!fam) schema_error(where, "missing key 'family'");
  const NoiseFamily family = parse_family(string_at(*fam, where + ".family"));
  std::vector<double> params;
  if (const auto* p = t.get("params")) params = numbers_at(*p, where + ".params");
  double scale = 1.0;
  if (const auto* s = t.get("scale")) scale = number_at(*s, where + ".scale");
  for (const auto& [key, value] : t) {
    (void)value;
    if (key != "family" && key != "params" && key != "scale") {
      schema_error(where, "unknown key '" + std::string(key.str()) + "'");
    }
  }
  try {
    return NoiseSpec::make(family, std::move(params), scale);
  } catch (const Error& e) {
    schema_error(where, e.what());
  }
}

// Overlays the keys present in `t` onto `base`.
inline ScmParams scm_from(const toml::table& t, ScmParams base, const std::string& where) {
  for (const auto& [key, value] : t) {
    const std::string k(key.str());
    const std::string at = where + "." + k;
    if (k == "alpha") base.alpha = number_at(value, at);
    else if (k == "beta") base.beta = number_at(value, at);
    else if (k == "gamma") base.gamma = number_at(value, at);
    else if (k == "noise_u") base.noise_u = noise_from(value, at);
    else if (k == "noise_t") base.noise_t = noise_from(value, at);
    else if (k == "noise_y") base.noise_y = noise_from(value, at);
    else schema_error(where, "unknown key '" + k + "'");
  }
  return base;
}

inline toml::table parse_toml(std::string_view text, const std::string& what) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ParseError, what + ": " + std::string(e.description()) + " (line " +
                                           std::to_string(e.source().begin.line) + ")");
  }
}

}  // namespace momentid::detail
