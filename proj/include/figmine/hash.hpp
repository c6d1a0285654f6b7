#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace figmine {

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace figmine
