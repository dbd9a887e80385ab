#include "tpcs/bytes.hpp"

#include <cstring>

namespace tpcs {

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

std::string hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

void append_u32_be(Bytes& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

void append_u64_be(Bytes& out, uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

uint64_t read_u64_be(std::span<const uint8_t> in) {
  if (in.size() < 8) throw DecodeError("u64: short input");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

Bytes mpz_to_bytes(const mpz_class& v, size_t width) {
  if (v < 0) throw DecodeError("mpz_to_bytes: negative value");
  size_t need = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  if (v == 0) need = 0;
  if (need > width) throw DecodeError("mpz_to_bytes: value wider than field");
  Bytes out(width, 0);
  size_t count = 0;
  mpz_export(out.data() + (width - need), &count, 1, 1, 1, 0, v.get_mpz_t());
  return out;
}

mpz_class mpz_from_bytes(std::span<const uint8_t> in) {
  mpz_class v;
  mpz_import(v.get_mpz_t(), in.size(), 1, 1, 1, 0, in.data());
  return v;
}

void Serializer::field(std::span<const uint8_t> data) {
  append_u32_be(out_, uint32_t(data.size()));
  out_.insert(out_.end(), data.begin(), data.end());
}

void Serializer::field_u64(uint64_t v) {
  Bytes tmp;
  append_u64_be(tmp, v);
  field(tmp);
}

void Serializer::field_mpz(const mpz_class& v, size_t width) {
  field(mpz_to_bytes(v, width));
}

}  // namespace tpcs
