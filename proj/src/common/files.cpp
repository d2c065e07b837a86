#include "plp/common/files.hpp"

#include <fstream>
#include <sstream>

#include "plp/common/error.hpp"

namespace plp {

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  Bytes out(size);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(size));
  return out;
}

std::string read_text_file(const fs::path& path) { return to_string(read_file(path)); }

void write_file_atomic(const fs::path& path, std::span<const std::byte> data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
}

RecordLog::RecordLog(fs::path path) { open(std::move(path)); }

void RecordLog::open(fs::path path) {
  std::lock_guard lock(mutex_);
  path_ = std::move(path);
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
}

void RecordLog::append(const nlohmann::json& record) {
  if (!enabled()) return;
  std::string line = record.dump();
  line.push_back('\n');
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot append to " + path_.string());
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "short append " + path_.string());
}

void RecordLog::append_many(const std::vector<nlohmann::json>& records) {
  if (!enabled() || records.empty()) return;
  std::string buffer;
  for (const auto& r : records) {
    buffer += r.dump();
    buffer.push_back('\n');
  }
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot append to " + path_.string());
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "short append " + path_.string());
}

std::vector<nlohmann::json> RecordLog::read_all() const {
  if (!enabled() || !fs::exists(path_)) return {};
  return read_json_lines(path_);
}

std::vector<nlohmann::json> read_json_lines(const fs::path& path) {
  return parse_json_lines(read_text_file(path));
}

std::vector<nlohmann::json> parse_json_lines(std::string_view text) {
  std::vector<nlohmann::json> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::InvalidArgument,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace plp
