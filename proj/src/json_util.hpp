#pragma once

// Internal JSON access helpers for the config parsers. Failures surface as
// Error with a message naming the offending field.

#include <set>
#include <string>

#include "json.hpp"
#include "udsmc/errors.hpp"

namespace udsmc::jsonu {

using nlohmann::json;

inline json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    fail(errc::parse_error, std::string(what) + ": invalid JSON");
  return j;
}

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      fail(errc::parse_error,
           std::string(what) + ": unknown field '" + it.key() + "'");
}

inline const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline double num_of(const json& v, const char* where) {
  if (!v.is_number())
    fail(errc::parse_error, std::string(where) + ": expected a number");
  return v.get<double>();
}

inline long int_of(const json& v, const char* where) {
  if (!v.is_number_integer())
    fail(errc::parse_error, std::string(where) + ": expected an integer");
  return v.get<long>();
}

inline double opt_num(const json& j, const char* key, double dflt) {
  const json* v = find(j, key);
  return v ? num_of(*v, key) : dflt;
}

inline long opt_int(const json& j, const char* key, long dflt) {
  const json* v = find(j, key);
  return v ? int_of(*v, key) : dflt;
}

inline bool opt_bool(const json& j, const char* key, bool dflt) {
  const json* v = find(j, key);
  if (!v) return dflt;
  if (!v->is_boolean())
    fail(errc::parse_error, std::string(key) + ": expected a boolean");
  return v->get<bool>();
}

inline std::string opt_str(const json& j, const char* key,
                           const std::string& dflt) {
  const json* v = find(j, key);
  if (!v) return dflt;
  if (!v->is_string())
    fail(errc::parse_error, std::string(key) + ": expected a string");
  return v->get<std::string>();
}

inline std::string need_str(const json& j, const char* key) {
  if (!find(j, key))
    fail(errc::parse_error, std::string("missing field '") + key + "'");
  return opt_str(j, key, "");
}

inline long need_int(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) fail(errc::parse_error, std::string("missing field '") + key + "'");
  return int_of(*v, key);
}

inline double need_num(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) fail(errc::parse_error, std::string("missing field '") + key + "'");
  return num_of(*v, key);
}

}  // namespace udsmc::jsonu
