#include "coagent/journal.hpp"

#include <ctime>

namespace coagent::pipeline {

using util::Json;

namespace {

std::string utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

std::filesystem::path Journal::path_for(const std::filesystem::path& run_dir) {
  return run_dir / "journal.ndjson";
}

Journal::Journal(const std::filesystem::path& run_dir)
    : log_(path_for(run_dir)) {
  if (std::filesystem::exists(path_for(run_dir))) {
    const auto existing = read_all(run_dir);
    if (!existing.empty()) next_seq_ = existing.back().seq + 1;
  }
}

void Journal::append(const std::string& type, Json record) {
  record["seq"] = next_seq_;
  record["type"] = type;
  Json line;
  line["record"] = std::move(record);
  line["ts"] = utc_now();
  log_.append_line(util::canonical(line));
  ++next_seq_;
}

std::vector<JournalEntry> Journal::read_all(
    const std::filesystem::path& run_dir) {
  const auto path = path_for(run_dir);
  std::vector<JournalEntry> entries;
  if (!std::filesystem::exists(path)) return entries;

  const std::string content = util::read_file(path);
  std::size_t offset = 0;
  std::uint64_t expected_seq = 0;
  while (offset < content.size()) {
    const std::size_t line_start = offset;
    std::size_t newline = content.find('\n', offset);
    if (newline == std::string::npos) {
      throw JournalCorrupt(line_start, "truncated journal line");
    }
    const std::string_view line(content.data() + line_start,
                                newline - line_start);
    offset = newline + 1;
    if (line.empty()) {
      throw JournalCorrupt(line_start, "empty journal line");
    }

    Json parsed = Json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() ||
        !parsed.contains("record") || !parsed.at("record").is_object()) {
      throw JournalCorrupt(line_start, "unparseable journal line");
    }
    const Json& record = parsed.at("record");
    if (!record.contains("seq") || !record.contains("type")) {
      throw JournalCorrupt(line_start, "journal record missing seq/type");
    }
    JournalEntry entry;
    entry.seq = record.at("seq").get<std::uint64_t>();
    entry.type = record.at("type").get<std::string>();
    entry.record = record;
    entry.byte_offset = line_start;
    if (entry.seq != expected_seq) {
      throw JournalCorrupt(line_start, "journal sequence gap");
    }
    ++expected_seq;
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace coagent::pipeline
