#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace augbench {

// FIPS 180-4 SHA-256. Content-addressed cache keys and input-file hashes are
// computed with this so digests do not depend on optional TLS libraries.
std::array<std::uint8_t, 32> sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);

}  // namespace augbench
