#include "coop/exact.h"

#include "coop/error.h"

#include <cctype>
#include <charconv>
#include <string>

namespace coop {

namespace {

BigInt pow10(int n) {
  BigInt p = 1;
  for (int i = 0; i < n; ++i) p *= 10;
  return p;
}

// cpp_int reads a leading 0 as an octal prefix, so strip them first.
BigInt parse_digits(std::string_view digits) {
  const auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? BigInt(0) : BigInt(std::string(digits.substr(first)));
}

bool all_digits(std::string_view s) {
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Exact parse_decimal(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  std::string_view whole = s;
  std::string_view frac;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    whole = s.substr(0, dot);
    frac = s.substr(dot + 1);
  }
  if ((whole.empty() && frac.empty()) || !all_digits(whole) || !all_digits(frac)) {
    fail(ErrorCode::ParseError, "not a decimal number: '" + std::string(text) + "'");
  }
  std::string digits;
  digits.append(whole);
  digits.append(frac);
  const BigInt numerator = parse_digits(digits);
  Exact out(numerator, pow10(static_cast<int>(frac.size())));
  return negative ? Exact(-out) : out;
}

Exact exact_from_json(const nlohmann::json& value) {
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s.find('/') != std::string::npos) return parse_ratio_string(s);
    return parse_decimal(s);
  }
  if (value.is_number_integer()) {
    return Exact(value.get<std::int64_t>());
  }
  if (value.is_number_float()) {
    const double d = value.get<double>();
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d, std::chars_format::fixed);
    if (ec != std::errc{}) fail(ErrorCode::ParseError, "number out of range");
    return parse_decimal(std::string_view(buf, static_cast<std::size_t>(end - buf)));
  }
  fail(ErrorCode::ParseError, "expected a number, got " + std::string(value.type_name()));
}

std::string to_fixed(const Exact& value, int places) {
  const BigInt scale = pow10(places);
  const bool negative = value < 0;
  const Exact magnitude = negative ? Exact(-value) : value;
  const BigInt num = boost::multiprecision::numerator(magnitude) * scale;
  const BigInt den = boost::multiprecision::denominator(magnitude);
  BigInt q = num / den;
  const BigInt r = num % den;
  if (r * 2 >= den) q += 1;

  std::string digits = q.str();
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places)) {
      digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  }
  if (negative && q != 0) digits.insert(0, "-");
  return digits;
}

std::string to_ratio_string(const Exact& value) {
  return boost::multiprecision::numerator(value).str() + "/" +
         boost::multiprecision::denominator(value).str();
}

Exact parse_ratio_string(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  auto num_text = text.substr(0, slash);
  auto den_text = text.substr(slash + 1);
  bool negative = false;
  if (!num_text.empty() && num_text.front() == '-') {
    negative = true;
    num_text.remove_prefix(1);
  }
  if (num_text.empty() || den_text.empty() || !all_digits(num_text) || !all_digits(den_text)) {
    fail(ErrorCode::ParseError, "not a ratio: '" + std::string(text) + "'");
  }
  BigInt den = parse_digits(den_text);
  if (den == 0) fail(ErrorCode::ParseError, "zero denominator: '" + std::string(text) + "'");
  BigInt num = parse_digits(num_text);
  if (negative) num = -num;
  return Exact(num, den);
}

nlohmann::json to_audit_json(const Exact& value) {
  return {{"value", to_fixed(value, 2)}, {"exact", to_ratio_string(value)}};
}

Exact from_audit_json(const nlohmann::json& value) {
  if (value.is_object() && value.contains("exact")) {
    return parse_ratio_string(value.at("exact").get<std::string>());
  }
  return exact_from_json(value);
}

nlohmann::json to_decimal_json(const Exact& value, int max_places) {
  for (int places = 0; places <= max_places; ++places) {
    const Exact scaled = value * Exact(pow10(places));
    if (boost::multiprecision::denominator(scaled) == 1) {
      if (places == 0) return boost::multiprecision::numerator(value).str();
      return to_fixed(value, places);
    }
  }
  return to_ratio_string(value);
}

}  // namespace coop
