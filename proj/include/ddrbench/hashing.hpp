#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ddrbench {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);
std::string to_hex(Sha256Digest const& digest);
std::string sha256_file_hex(std::filesystem::path const& path);

/// First eight digest bytes, big-endian. Stable across platforms.
std::uint64_t sha256_prefix64(std::string_view bytes);

}  // namespace ddrbench
