#include "tpcs/paillier.hpp"

#include <cmath>
#include <stdexcept>

namespace tpcs::paillier {

namespace {

mpz_class lfunc(const mpz_class& c, const mpz_class& n) { return (c - 1) / n; }

Keypair finish(const mpz_class& p1, const mpz_class& q1, mpz_class g) {
  Keypair kp;
  kp.pk.n = p1 * q1;
  kp.pk.n2 = kp.pk.n * kp.pk.n;
  kp.pk.g = (g == 0) ? kp.pk.n + 1 : g;
  mpz_lcm(kp.sk.lambda.get_mpz_t(), mpz_class(p1 - 1).get_mpz_t(),
          mpz_class(q1 - 1).get_mpz_t());
  mpz_class t;
  mpz_powm(t.get_mpz_t(), kp.pk.g.get_mpz_t(), kp.sk.lambda.get_mpz_t(),
           kp.pk.n2.get_mpz_t());
  mpz_class l = lfunc(t, kp.pk.n);
  if (mpz_invert(kp.sk.mu.get_mpz_t(), l.get_mpz_t(), kp.pk.n.get_mpz_t()) == 0)
    throw std::runtime_error("keygen: mu does not exist for this g");
  return kp;
}

}  // namespace

Keypair keygen(unsigned kappa1, Rng& rng) {
  if (kappa1 < 16) throw std::invalid_argument("keygen: kappa1 too small");
  mpz_class p1 = rng.prime(kappa1);
  mpz_class q1;
  do {
    q1 = rng.prime(kappa1);
  } while (q1 == p1);
  return finish(p1, q1, 0);
}

Keypair from_primes(const mpz_class& p1, const mpz_class& q1,
                    const mpz_class& g) {
  return finish(p1, q1, g);
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m,
                   const mpz_class& r) {
  if (m < 0 || m >= pk.n)
    throw std::invalid_argument("encrypt: plaintext out of range");
  mpz_class gc;
  mpz_gcd(gc.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
  if (r <= 0 || r >= pk.n || gc != 1)
    throw std::invalid_argument("encrypt: r not a unit mod n");
  mpz_class gm, rn;
  mpz_powm(gm.get_mpz_t(), pk.g.get_mpz_t(), m.get_mpz_t(), pk.n2.get_mpz_t());
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(), pk.n2.get_mpz_t());
  return Ciphertext{(gm * rn) % pk.n2};
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, Rng& rng) {
  return encrypt(pk, m, rng.mpz_coprime(pk.n));
}

mpz_class decrypt(const SecretKey& sk, const PublicKey& pk,
                  const Ciphertext& ct) {
  mpz_class gc;
  mpz_gcd(gc.get_mpz_t(), ct.c.get_mpz_t(), pk.n.get_mpz_t());
  if (ct.c <= 0 || ct.c >= pk.n2 || gc != 1)
    throw std::invalid_argument("decrypt: malformed ciphertext");
  mpz_class t;
  mpz_powm(t.get_mpz_t(), ct.c.get_mpz_t(), sk.lambda.get_mpz_t(),
           pk.n2.get_mpz_t());
  return (lfunc(t, pk.n) * sk.mu) % pk.n;
}

Ciphertext add(const PublicKey& pk, const Ciphertext& c1,
               const Ciphertext& c2) {
  return Ciphertext{(c1.c * c2.c) % pk.n2};
}

Ciphertext scalar_mul(const PublicKey& pk, const Ciphertext& c,
                      const mpz_class& a) {
  if (a < 0 || a >= pk.n) throw std::invalid_argument("scalar_mul: bad scalar");
  mpz_class r;
  mpz_powm(r.get_mpz_t(), c.c.get_mpz_t(), a.get_mpz_t(), pk.n2.get_mpz_t());
  return Ciphertext{r};
}

Bytes serialize(const PublicKey& pk, const Ciphertext& c) {
  return mpz_to_bytes(c.c, pk.ciphertext_width());
}

Ciphertext deserialize(const PublicKey& pk, std::span<const uint8_t> in) {
  if (in.size() != pk.ciphertext_width())
    throw DecodeError("ciphertext: bad length");
  mpz_class c = mpz_from_bytes(in);
  if (c <= 0 || c >= pk.n2) throw DecodeError("ciphertext: out of range");
  return Ciphertext{c};
}

long FixedPointCodec::encode_trust(double v) const {
  if (v < 0.0 || v > 1.0)
    throw std::invalid_argument("encode: value outside [0,1]");
  return std::lround(v * double(trust_scale));
}

long FixedPointCodec::encode_feedback(double v) const {
  if (v < 0.0 || v > 1.0)
    throw std::invalid_argument("encode: value outside [0,1]");
  return std::lround(v * double(feedback_scale));
}

bool FixedPointCodec::sum_fits(size_t max_reports, const mpz_class& n) const {
  mpz_class worst = mpz_class(long(max_reports)) * trust_scale * feedback_scale;
  return worst < n;
}

}  // namespace tpcs::paillier
