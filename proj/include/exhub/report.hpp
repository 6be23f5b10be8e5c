#pragma once

#include <cstdint>
#include <string>

namespace exhub {

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a 64-bit digest, hex-encoded; used to pin input files in reports.
std::string fnv1a_hex(const std::string& bytes);

std::string read_text_file(const std::string& path);  // throws on failure
void write_text_file(const std::string& path, const std::string& text);

}  // namespace exhub
