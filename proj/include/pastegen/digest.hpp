#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace pastegen {

/// Lowercase hex SHA-256 of a byte span.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);

/// SHA-256 of a file's contents. Throws IoError when unreadable.
std::string sha256_file(const std::string& path);

} // namespace pastegen
