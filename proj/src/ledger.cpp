#include "coop/ledger.h"

#include "coop/error.h"
#include "json_util.h"

#include <sstream>

namespace coop {

using nlohmann::json;

json to_json(const LedgerEntry& e) {
  return {{"seq", e.seq}, {"at", format_timestamp(e.at)}, {"actor", e.actor}, {"kind", e.kind}, {"data", e.data}};
}

LedgerEntry ledger_entry_from_json(const json& j) {
  using namespace detail;
  LedgerEntry e;
  const auto seq = get_int(j, "seq");
  if (seq < 1) fail(ErrorCode::ParseError, "ledger sequence numbers start at 1");
  e.seq = static_cast<std::uint64_t>(seq);
  e.at = get_time(j, "at");
  e.actor = get_string(j, "actor");
  e.kind = get_string(j, "kind");
  e.data = has(j, "data") ? j.at("data") : json::object();
  return e;
}

std::vector<LedgerEntry> parse_ledger(std::string_view text) {
  std::vector<LedgerEntry> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::ParseError, "ledger line " + std::to_string(line_no) + ": invalid JSON");
    try {
      auto e = ledger_entry_from_json(j);
      if (!out.empty() && e.seq <= out.back().seq) {
        fail(ErrorCode::ParseError, "sequence numbers must strictly increase");
      }
      out.push_back(std::move(e));
    } catch (const Error& err) {
      fail(ErrorCode::ParseError, "ledger line " + std::to_string(line_no) + ": " + err.what());
    }
    if (end == text.size()) break;
  }
  return out;
}

std::vector<LedgerEntry> read_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::NotFound, "cannot open ledger '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ledger(ss.str());
}

std::string serialize_ledger(const std::vector<LedgerEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

LedgerWriter::LedgerWriter(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) fail(ErrorCode::ConfigError, "cannot open ledger '" + path + "' for appending");
}

void LedgerWriter::append(const LedgerEntry& e) {
  out_ << to_json(e).dump() << '\n';
  out_.flush();
  if (!out_) fail(ErrorCode::ConfigError, "ledger write failed");
}

void LedgerWriter::flush() {
  out_.flush();
}

}  // namespace coop
