#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tpcs/paillier.hpp"

namespace tpcs {

// Epoch-binding secret shared by TA and RSUs only.
struct EpochSecret {
  mpz_class chi;  // in Z*_n
};

// The pair (C_i, c_sig) issued by TA: a Paillier encryption of the trust
// value plus a freshness signature bound to the issue epoch. For an honest
// token  c_trust * g^h == c_sig * h^n (mod n^2)  with h = H1(epoch || chi).
struct TrustToken {
  paillier::Ciphertext c_trust;
  paillier::Ciphertext c_sig;
  uint64_t epoch = 0;
};

// H1(t_c || chi) reduced mod n, rejection-rehashed (counter suffix) until the
// value is a unit mod n. Deterministic.
mpz_class epoch_hash(const paillier::PublicKey& pk, const EpochSecret& chi,
                     uint64_t epoch);

TrustToken issue(const paillier::PublicKey& pk, const EpochSecret& chi,
                 const mpz_class& trust, uint64_t epoch, Rng& rng);

// Multiply both components by the same (r')^n: plaintext and freshness are
// preserved while the wire bytes change.
TrustToken perturb(const paillier::PublicKey& pk, const TrustToken& token,
                   Rng& rng);

bool verify_fresh(const paillier::PublicKey& pk, const EpochSecret& chi,
                  const TrustToken& token, uint64_t current_epoch);

// Product form of the batch identity:
//   g^(k*h) * prod c_trust_j == h^(n*k) * prod c_sig_j  (mod n^2).
// Throws on an empty list or mixed epochs.
bool batch_verify_fresh(const paillier::PublicKey& pk, const EpochSecret& chi,
                        std::span<const TrustToken> tokens,
                        uint64_t current_epoch);

// Wire format: 8-byte big-endian epoch, then both ciphertexts fixed width.
Bytes serialize_token(const paillier::PublicKey& pk, const TrustToken& t);
TrustToken parse_token(const paillier::PublicKey& pk,
                       std::span<const uint8_t> in);

}  // namespace tpcs
