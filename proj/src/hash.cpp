#include "tpcs/hash.hpp"

#include <openssl/sha.h>

namespace tpcs {

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data) {
  std::array<uint8_t, 32> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Bytes xof(std::string_view tag, std::span<const uint8_t> msg, size_t out_len) {
  Bytes out;
  out.reserve(out_len);
  uint32_t ctr = 0;
  while (out.size() < out_len) {
    Bytes block;
    append_u32_be(block, uint32_t(tag.size()));
    block.insert(block.end(), tag.begin(), tag.end());
    append_u32_be(block, ctr++);
    block.insert(block.end(), msg.begin(), msg.end());
    auto digest = sha256(block);
    size_t take = std::min(digest.size(), out_len - out.size());
    out.insert(out.end(), digest.begin(), digest.begin() + take);
  }
  return out;
}

}  // namespace tpcs
