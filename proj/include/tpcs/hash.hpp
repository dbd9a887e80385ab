#pragma once

#include <array>
#include <span>
#include <string_view>

#include "tpcs/bytes.hpp"

namespace tpcs {

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data);

// Counter-mode SHA-256 expansion with a domain-separation tag; the basis for
// both H (hash-to-group) and H1 (kappa1-bit digest).
Bytes xof(std::string_view tag, std::span<const uint8_t> msg, size_t out_len);

}  // namespace tpcs
