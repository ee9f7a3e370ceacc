#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "microwrap/errors.hpp"

namespace microwrap {

/// A scalar or integer-list parameter as it appears in a config file.
using ParamValue = std::variant<bool, std::int64_t, double, std::string, std::vector<std::int64_t>>;
using ParamMap = std::map<std::string, ParamValue>;

namespace params {

inline const ParamValue* find(const ParamMap& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

inline std::int64_t get_int(const ParamMap& m, const std::string& key, std::optional<std::int64_t> fallback = {}) {
  const ParamValue* v = find(m, key);
  if (!v) {
    if (fallback) return *fallback;
    throw InvalidParam("missing required parameter '" + key + "'");
  }
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  throw InvalidParam("parameter '" + key + "' must be an integer");
}

inline double get_number(const ParamMap& m, const std::string& key, std::optional<double> fallback = {}) {
  const ParamValue* v = find(m, key);
  if (!v) {
    if (fallback) return *fallback;
    throw InvalidParam("missing required parameter '" + key + "'");
  }
  if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(v)) return *d;
  throw InvalidParam("parameter '" + key + "' must be a number");
}

inline bool get_bool(const ParamMap& m, const std::string& key, std::optional<bool> fallback = {}) {
  const ParamValue* v = find(m, key);
  if (!v) {
    if (fallback) return *fallback;
    throw InvalidParam("missing required parameter '" + key + "'");
  }
  if (const auto* b = std::get_if<bool>(v)) return *b;
  throw InvalidParam("parameter '" + key + "' must be a boolean");
}

inline std::string get_string(const ParamMap& m, const std::string& key, std::optional<std::string> fallback = {}) {
  const ParamValue* v = find(m, key);
  if (!v) {
    if (fallback) return *fallback;
    throw InvalidParam("missing required parameter '" + key + "'");
  }
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  throw InvalidParam("parameter '" + key + "' must be a string");
}

inline std::vector<std::int64_t> get_int_list(const ParamMap& m, const std::string& key) {
  const ParamValue* v = find(m, key);
  if (!v) throw InvalidParam("missing required parameter '" + key + "'");
  if (const auto* l = std::get_if<std::vector<std::int64_t>>(v)) return *l;
  throw InvalidParam("parameter '" + key + "' must be a list of integers");
}

/// Throws InvalidParam naming the first key not in `allowed`.
inline void reject_unknown(const ParamMap& m, std::initializer_list<const char*> allowed, const std::string& owner) {
  for (const auto& [key, value] : m) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw InvalidParam(owner + ": unknown parameter '" + key + "'");
  }
}

}  // namespace params
}  // namespace microwrap
