#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "coagent/util/fs.hpp"
#include "coagent/util/json.hpp"

namespace coagent::pipeline {

class JournalCorrupt : public Error {
 public:
  JournalCorrupt(std::size_t byte_offset, const std::string& message)
      : Error(message + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

struct JournalEntry {
  std::uint64_t seq = 0;
  std::string type;
  util::Json record;       // canonical payload, hashed and compared
  std::size_t byte_offset = 0;
};

// Append-only, newline-delimited journal. Each line is
// {"record":{...canonical...},"ts":"..."}; the wall-clock ts rides outside
// the record so determinism comparisons can ignore it. Appends fsync
// before returning: a record is durable before the next step begins.
class Journal {
 public:
  explicit Journal(const std::filesystem::path& run_dir);

  std::uint64_t next_seq() const { return next_seq_; }

  // record must not contain "seq"/"type"; they are added here.
  void append(const std::string& type, util::Json record);

  static std::filesystem::path path_for(const std::filesystem::path& run_dir);

  // Strict read: any unparseable or truncated line raises JournalCorrupt
  // naming the byte offset of the offending line.
  static std::vector<JournalEntry> read_all(
      const std::filesystem::path& run_dir);

 private:
  util::AppendLog log_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace coagent::pipeline
