#pragma once

#include "coop/timestamp.h"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace coop {

// One line of the append-only event ledger.
struct LedgerEntry {
  std::uint64_t seq = 0;
  Timestamp at{};
  std::string actor;
  std::string kind;
  nlohmann::json data = nlohmann::json::object();

  bool operator==(const LedgerEntry&) const = default;
};

nlohmann::json to_json(const LedgerEntry& e);
LedgerEntry ledger_entry_from_json(const nlohmann::json& j);

// Newline-delimited JSON, one entry per line, sequence numbers strictly
// increasing. Blank lines are skipped.
std::vector<LedgerEntry> read_ledger(const std::string& path);
std::vector<LedgerEntry> parse_ledger(std::string_view text);
std::string serialize_ledger(const std::vector<LedgerEntry>& entries);

// Appends entries to a ledger file, flushing after each line.
class LedgerWriter {
public:
  explicit LedgerWriter(const std::string& path);

  void append(const LedgerEntry& e);
  void flush();

private:
  std::ofstream out_;
};

}  // namespace coop
