#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace coop {

// All score arithmetic is carried out in arbitrary-precision rationals so
// that leaderboard ties never depend on floating-point rounding.
using Exact = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Parses a plain decimal literal ("0.25", "-3", "7.5") exactly.
// Throws Error{ParseError} on anything else.
Exact parse_decimal(std::string_view text);

// Accepts either a JSON number or a decimal string. Numbers are read through
// their shortest round-trip representation, so 0.6 becomes exactly 3/5.
Exact exact_from_json(const nlohmann::json& value);

// Round half away from zero to `places` decimals.
std::string to_fixed(const Exact& value, int places = 2);

// "num/den" in lowest terms.
std::string to_ratio_string(const Exact& value);
Exact parse_ratio_string(std::string_view text);

// {"value": "2310.00", "exact": "2310/1"}: presentation value plus the
// audit rational.
nlohmann::json to_audit_json(const Exact& value);
Exact from_audit_json(const nlohmann::json& value);

// Shortest decimal representation when the value is a terminating decimal
// with at most `max_places` digits, otherwise the ratio. Used when writing
// rulebook factors back out.
nlohmann::json to_decimal_json(const Exact& value, int max_places = 6);

}  // namespace coop
