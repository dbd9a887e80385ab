#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace tpcs {

using Bytes = std::vector<uint8_t>;

Bytes to_bytes(const std::string& s);
std::string hex(std::span<const uint8_t> data);

void append_u32_be(Bytes& out, uint32_t v);
void append_u64_be(Bytes& out, uint64_t v);
uint64_t read_u64_be(std::span<const uint8_t> in);

// Big-endian, fixed width. Throws if the value does not fit.
Bytes mpz_to_bytes(const mpz_class& v, size_t width);
mpz_class mpz_from_bytes(std::span<const uint8_t> in);

// Length-prefixed field concatenation; the canonical serialization used for
// everything that gets signed or dumped.
class Serializer {
 public:
  void field(std::span<const uint8_t> data);
  void field(const Bytes& data) { field(std::span<const uint8_t>(data)); }
  void field_u64(uint64_t v);
  void field_mpz(const mpz_class& v, size_t width);
  const Bytes& bytes() const { return out_; }

 private:
  Bytes out_;
};

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tpcs
