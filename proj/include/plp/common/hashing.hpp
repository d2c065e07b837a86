#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plp {

using Bytes = std::vector<std::byte>;

// Lowercase hex SHA-256 digest (64 chars).
std::string sha256_hex(std::span<const std::byte> data);
std::string sha256_hex(std::string_view data);

bool is_sha256_hex(std::string_view s);

Bytes to_bytes(std::string_view s);
std::string to_string(std::span<const std::byte> data);

Bytes base64_decode(std::string_view encoded);
std::string base64_encode(std::span<const std::byte> data);

}  // namespace plp
