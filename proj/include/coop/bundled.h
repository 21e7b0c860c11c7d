#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

// Fixture documents compiled into the library (rulebooks, generator domains).
namespace coop::bundled {

const std::map<std::string_view, std::string_view>& files();

inline std::optional<std::string_view> find(std::string_view name) {
  const auto& table = files();
  if (auto it = table.find(name); it != table.end()) return it->second;
  return std::nullopt;
}

}  // namespace coop::bundled
