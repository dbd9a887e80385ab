#include "tpcs/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace tpcs {

double Rng::uniform01() {
  return double(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double sigma) {
  double u1 = uniform01();
  double u2 = uniform01();
  if (u1 < 1e-300) u1 = 1e-300;
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  return mean + sigma * z;
}

Bytes Rng::bytes(size_t n) {
  Bytes out(n);
  uint64_t word = 0;
  for (size_t i = 0; i < n; ++i) {
    if (i % 8 == 0) word = gen_();
    out[i] = uint8_t(word >> (8 * (i % 8)));
  }
  return out;
}

mpz_class Rng::mpz_bits(unsigned bits) {
  mpz_class v = 0;
  unsigned words = (bits + 63) / 64;
  for (unsigned i = 0; i < words; ++i) {
    v <<= 64;
    v += mpz_class(gen_());
  }
  mpz_class mask = (mpz_class(1) << bits) - 1;
  return v & mask;
}

mpz_class Rng::mpz_below(const mpz_class& bound) {
  if (bound <= 0) throw std::invalid_argument("mpz_below: bound must be positive");
  unsigned bits = unsigned(mpz_sizeinbase(bound.get_mpz_t(), 2));
  for (;;) {
    mpz_class v = mpz_bits(bits);
    if (v < bound) return v;
  }
}

mpz_class Rng::mpz_coprime(const mpz_class& bound) {
  for (int tries = 0; tries < 4096; ++tries) {
    mpz_class v = mpz_below(bound);
    if (v == 0) continue;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), v.get_mpz_t(), bound.get_mpz_t());
    if (g == 1) return v;
  }
  throw std::runtime_error("mpz_coprime: exhausted retries");
}

mpz_class Rng::prime(unsigned bits) {
  if (bits < 4) throw std::invalid_argument("prime: bits too small");
  for (int tries = 0; tries < 100000; ++tries) {
    mpz_class v = mpz_bits(bits);
    mpz_setbit(v.get_mpz_t(), bits - 1);
    mpz_setbit(v.get_mpz_t(), 0);
    if (mpz_probab_prime_p(v.get_mpz_t(), 32) > 0) return v;
  }
  throw std::runtime_error("prime: generation failed");
}

Rng Rng::fork() { return Rng(gen_()); }

}  // namespace tpcs
