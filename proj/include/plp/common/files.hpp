#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "plp/common/hashing.hpp"

namespace plp {

namespace fs = std::filesystem;

Bytes read_file(const fs::path& path);
std::string read_text_file(const fs::path& path);

// Writes through a temporary sibling and renames into place.
void write_file_atomic(const fs::path& path, std::span<const std::byte> data);
void write_file_atomic(const fs::path& path, std::string_view text);

// Line-delimited JSON records, one per line, append-only.
class RecordLog {
 public:
  RecordLog() = default;
  explicit RecordLog(fs::path path);

  // Attaches the log to a file; a default-constructed log discards appends.
  void open(fs::path path);

  bool enabled() const { return !path_.empty(); }
  const fs::path& path() const { return path_; }

  void append(const nlohmann::json& record);
  // One open/flush for the whole batch.
  void append_many(const std::vector<nlohmann::json>& records);
  std::vector<nlohmann::json> read_all() const;

 private:
  fs::path path_;
  std::mutex mutex_;
};

std::vector<nlohmann::json> read_json_lines(const fs::path& path);
std::vector<nlohmann::json> parse_json_lines(std::string_view text);

}  // namespace plp
