#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace coagent::util {

std::string read_file(const std::filesystem::path& path);

// Write-temp-then-rename so readers never observe a torn file.
void atomic_write_file(const std::filesystem::path& path,
                       std::string_view bytes);

// Append-only log with per-append fsync. One instance per open file.
class AppendLog {
 public:
  explicit AppendLog(const std::filesystem::path& path);
  ~AppendLog();

  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  // Appends `line` plus a trailing newline and fsyncs before returning.
  void append_line(std::string_view line);

 private:
  int fd_ = -1;
  std::filesystem::path path_;
};

// Exclusive advisory lock on <dir>/.lock. Throws if already held.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir);
  ~DirLock();

  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace coagent::util
