#include "tpcs/trust_token.hpp"

#include <stdexcept>

#include "tpcs/hash.hpp"

namespace tpcs {

namespace {

mpz_class powm(const mpz_class& base, const mpz_class& exp,
               const mpz_class& m) {
  mpz_class r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), m.get_mpz_t());
  return r;
}

}  // namespace

mpz_class epoch_hash(const paillier::PublicKey& pk, const EpochSecret& chi,
                     uint64_t epoch) {
  size_t n_bits = mpz_sizeinbase(pk.n.get_mpz_t(), 2);
  size_t width = (n_bits + 7) / 8;
  for (uint32_t counter = 0; counter < 4096; ++counter) {
    Serializer s;
    s.field_u64(epoch);
    s.field_mpz(chi.chi, width);
    if (counter > 0) s.field_u64(counter);
    mpz_class h = mpz_from_bytes(xof("TPCS-H1", s.bytes(), width)) % pk.n;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), h.get_mpz_t(), pk.n.get_mpz_t());
    if (h != 0 && g == 1) return h;
  }
  throw std::runtime_error("epoch_hash: no unit found");
}

TrustToken issue(const paillier::PublicKey& pk, const EpochSecret& chi,
                 const mpz_class& trust, uint64_t epoch, Rng& rng) {
  mpz_class h = epoch_hash(pk, chi, epoch);
  mpz_class r = rng.mpz_coprime(pk.n);
  // C = g^T * (r*h)^n,  c_sig = C * g^h = g^(T+h) * r^n * h^n ... the extra
  // h^n on C is what the freshness identity cancels against.
  mpz_class rh = (r * h) % pk.n;
  paillier::Ciphertext c_trust = paillier::encrypt(pk, trust, rh);
  mpz_class gh = powm(pk.g, h, pk.n2);
  paillier::Ciphertext c_sig{(c_trust.c * gh) % pk.n2};
  // c_sig as defined in the scheme carries r^n, not (r*h)^n: divide out h^n.
  mpz_class hn = powm(h, pk.n, pk.n2);
  mpz_class hn_inv;
  if (mpz_invert(hn_inv.get_mpz_t(), hn.get_mpz_t(), pk.n2.get_mpz_t()) == 0)
    throw std::runtime_error("issue: h not invertible mod n^2");
  c_sig.c = (c_sig.c * hn_inv) % pk.n2;
  return TrustToken{c_trust, c_sig, epoch};
}

TrustToken perturb(const paillier::PublicKey& pk, const TrustToken& token,
                   Rng& rng) {
  mpz_class r = rng.mpz_coprime(pk.n);
  mpz_class rn = powm(r, pk.n, pk.n2);
  return TrustToken{paillier::Ciphertext{(token.c_trust.c * rn) % pk.n2},
                    paillier::Ciphertext{(token.c_sig.c * rn) % pk.n2},
                    token.epoch};
}

bool verify_fresh(const paillier::PublicKey& pk, const EpochSecret& chi,
                  const TrustToken& token, uint64_t current_epoch) {
  if (token.epoch != current_epoch) return false;
  if (token.c_trust.c <= 0 || token.c_trust.c >= pk.n2) return false;
  if (token.c_sig.c <= 0 || token.c_sig.c >= pk.n2) return false;
  mpz_class h = epoch_hash(pk, chi, current_epoch);
  mpz_class lhs = (token.c_trust.c * powm(pk.g, h, pk.n2)) % pk.n2;
  mpz_class rhs = (token.c_sig.c * powm(h, pk.n, pk.n2)) % pk.n2;
  return lhs == rhs;
}

bool batch_verify_fresh(const paillier::PublicKey& pk, const EpochSecret& chi,
                        std::span<const TrustToken> tokens,
                        uint64_t current_epoch) {
  if (tokens.empty())
    throw std::invalid_argument("batch_verify_fresh: empty list");
  for (const auto& t : tokens)
    if (t.epoch != tokens.front().epoch)
      throw std::invalid_argument("batch_verify_fresh: mixed epochs");
  if (tokens.front().epoch != current_epoch) return false;
  mpz_class h = epoch_hash(pk, chi, current_epoch);
  mpz_class prod_trust = 1, prod_sig = 1;
  for (const auto& t : tokens) {
    prod_trust = (prod_trust * t.c_trust.c) % pk.n2;
    prod_sig = (prod_sig * t.c_sig.c) % pk.n2;
  }
  mpz_class k(long(tokens.size()));
  mpz_class lhs = (prod_trust * powm(pk.g, k * h, pk.n2)) % pk.n2;
  mpz_class rhs = (prod_sig * powm(h, pk.n * k, pk.n2)) % pk.n2;
  return lhs == rhs;
}

Bytes serialize_token(const paillier::PublicKey& pk, const TrustToken& t) {
  Bytes out;
  append_u64_be(out, t.epoch);
  Bytes a = paillier::serialize(pk, t.c_trust);
  Bytes b = paillier::serialize(pk, t.c_sig);
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

TrustToken parse_token(const paillier::PublicKey& pk,
                       std::span<const uint8_t> in) {
  size_t w = pk.ciphertext_width();
  if (in.size() != 8 + 2 * w) throw DecodeError("token: bad length");
  TrustToken t;
  t.epoch = read_u64_be(in);
  t.c_trust = paillier::deserialize(pk, in.subspan(8, w));
  t.c_sig = paillier::deserialize(pk, in.subspan(8 + w, w));
  return t;
}

}  // namespace tpcs
