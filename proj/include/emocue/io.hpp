#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace emocue::io {

/// Whole file as bytes; throws Error(FileNotFound) or Error(Io).
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// 1-based line number of a byte offset.
std::size_t line_of(std::string_view text, std::size_t byte_offset);

}  // namespace emocue::io
