#include "abd/seeding.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace abd {

std::array<std::uint8_t, 32> sha256(std::string_view data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
    throw std::runtime_error("SHA-256 computation failed");
  return out;
}

std::string hex(const std::array<std::uint8_t, 32>& digest) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  for (std::uint8_t b : digest) {
    s += kDigits[b >> 4];
    s += kDigits[b & 15];
  }
  return s;
}

std::uint32_t holdout_seed(std::string_view dataset_path, std::string_view instance_id, int idx,
                           std::uint64_t global_seed) {
  std::string msg;
  msg += dataset_path;
  msg += instance_id;
  msg += std::to_string(idx);
  msg += std::to_string(global_seed);
  const auto d = sha256(msg);
  // 2^31 divides 2^8k, so only the last four bytes matter.
  const std::uint32_t tail = (std::uint32_t(d[28]) << 24) | (std::uint32_t(d[29]) << 16) |
                             (std::uint32_t(d[30]) << 8) | std::uint32_t(d[31]);
  return tail & 0x7fffffffu;
}

}  // namespace abd
