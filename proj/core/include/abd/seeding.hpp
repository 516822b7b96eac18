#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace abd {

std::array<std::uint8_t, 32> sha256(std::string_view data);
std::string hex(const std::array<std::uint8_t, 32>& digest);

// SHA-256 over the plain concatenation dataset_path, instance_id,
// decimal idx, decimal global_seed; the digest read as a big-endian integer,
// reduced mod 2^31.
std::uint32_t holdout_seed(std::string_view dataset_path, std::string_view instance_id, int idx,
                           std::uint64_t global_seed);

}  // namespace abd
