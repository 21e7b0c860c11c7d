#pragma once

// Small checked accessors for request bodies and ledger payloads. Shape
// problems become Error{ParseError} naming the field.

#include "coop/error.h"
#include "coop/exact.h"
#include "coop/timestamp.h"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace coop::detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object()) fail(ErrorCode::ParseError, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  return *it;
}

inline bool has(const nlohmann::json& j, const char* key) {
  return j.is_object() && j.contains(key) && !j.at(key).is_null();
}

inline std::string get_string(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) fail(ErrorCode::ParseError, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::string get_string_or(const nlohmann::json& j, const char* key, std::string fallback) {
  return has(j, key) ? get_string(j, key) : std::move(fallback);
}

inline std::int64_t get_int(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) fail(ErrorCode::ParseError, std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

inline bool get_bool(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_boolean()) fail(ErrorCode::ParseError, std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

inline Exact get_exact(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  try {
    return from_audit_json(v);
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::ParseError, std::string("field '") + key + "' must be a number");
  }
}

inline Timestamp get_time(const nlohmann::json& j, const char* key) {
  return parse_timestamp(get_string(j, key));
}

}  // namespace coop::detail
