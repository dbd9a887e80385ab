#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include <gmpxx.h>

#include "tpcs/bytes.hpp"
#include "tpcs/rng.hpp"

namespace tpcs::paillier {

struct PublicKey {
  mpz_class n;   // p1 * q1
  mpz_class g;   // n + 1 by default
  mpz_class n2;  // cached n^2

  size_t ciphertext_width() const {
    return 2 * ((mpz_sizeinbase(n.get_mpz_t(), 2) + 7) / 8);
  }
};

struct SecretKey {
  mpz_class lambda;  // lcm(p1 - 1, q1 - 1)
  mpz_class mu;      // (L(g^lambda mod n^2))^-1 mod n
};

struct Ciphertext {
  mpz_class c;
  bool operator==(const Ciphertext&) const = default;
};

struct Keypair {
  PublicKey pk;
  SecretKey sk;
};

// kappa1 is the bit length of each prime; deterministic for a fixed rng seed.
Keypair keygen(unsigned kappa1, Rng& rng);
// Toy keys for oracle tests (e.g. p1=5, q1=7). g defaults to n+1 when 0.
Keypair from_primes(const mpz_class& p1, const mpz_class& q1,
                    const mpz_class& g = 0);

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, const mpz_class& r);
Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, Rng& rng);
mpz_class decrypt(const SecretKey& sk, const PublicKey& pk,
                  const Ciphertext& c);

Ciphertext add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2);
Ciphertext scalar_mul(const PublicKey& pk, const Ciphertext& c,
                      const mpz_class& a);

Bytes serialize(const PublicKey& pk, const Ciphertext& c);
Ciphertext deserialize(const PublicKey& pk, std::span<const uint8_t> in);

// Trust values and feedbacks are reals in [0,1]; Paillier plaintexts are
// integers, so both are carried as rounded fixed-point values and the final
// ratio is recovered exactly as a rational.
struct FixedPointCodec {
  long trust_scale = 10000;
  long feedback_scale = 1000;

  long encode_trust(double v) const;
  long encode_feedback(double v) const;
  double decode_trust(long v) const { return double(v) / double(trust_scale); }
  double decode_feedback(long v) const {
    return double(v) / double(feedback_scale);
  }
  // Worst-case aggregate plaintext must stay below n.
  bool sum_fits(size_t max_reports, const mpz_class& n) const;
};

}  // namespace tpcs::paillier
