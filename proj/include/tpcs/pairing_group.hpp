#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "tpcs/bytes.hpp"
#include "tpcs/rng.hpp"

namespace tpcs {

// Quadratic extension element a + b*i with i^2 = -1 (valid because the field
// prime is chosen with p = 3 mod 4).
struct Fp2 {
  mpz_class a, b;
  bool operator==(const Fp2&) const = default;
};

// Prime-order group with a symmetric bilinear map, realized as the order-q
// subgroup of the supersingular curve y^2 = x^3 + x over F_p with
// p + 1 = cofactor * q and p = 3 mod 4. The map is the Tate pairing composed
// with the distortion map (x, y) -> (-x, i*y), which makes e(P, P) != 1, so
// the scheme's symmetric-pairing equations hold verbatim.
class PairingGroup {
 public:
  struct Point {
    mpz_class x, y;
    bool inf = true;
    bool operator==(const Point&) const = default;
  };

  // Deterministic for a given kappa: the same parameters come out on every
  // call, so encodings are stable across runs.
  static std::shared_ptr<const PairingGroup> generate(unsigned kappa_bits);

  const mpz_class& order() const { return q_; }        // group order q
  const mpz_class& field_prime() const { return p_; }
  const Point& generator() const { return P_; }
  unsigned kappa() const { return kappa_; }

  Point add(const Point& a, const Point& b) const;
  Point dbl(const Point& a) const;
  Point neg(const Point& a) const;
  Point mul(const mpz_class& k, const Point& a) const;
  bool on_curve(const Point& a) const;

  // H: {0,1}* -> G, try-and-increment followed by cofactor clearing.
  Point hash_to_group(std::span<const uint8_t> msg,
                      std::string_view dst = "TPCS-H") const;

  // Full pairing e: G x G -> G_T (subgroup of F_{p^2}^*); bumps the
  // instrumentation counter once per call.
  Fp2 pair(const Point& a, const Point& b) const;
  Fp2 gt_identity() const { return Fp2{1, 0}; }
  Fp2 gt_mul(const Fp2& x, const Fp2& y) const { return fp2_mul(x, y); }
  Fp2 gt_pow(const Fp2& x, const mpz_class& e) const { return fp2_pow(x, e); }

  uint64_t pairing_count() const { return pairings_.load(); }
  void reset_pairing_count() const { pairings_.store(0); }

  mpz_class random_scalar(Rng& rng) const;  // in [1, q)

  size_t element_size() const { return 1 + p_width_; }
  Bytes encode(const Point& a) const;        // compressed: tag byte + x
  Point decode(std::span<const uint8_t> in) const;  // throws DecodeError

 private:
  PairingGroup() = default;

  Fp2 fp2_mul(const Fp2& x, const Fp2& y) const;
  Fp2 fp2_sqr(const Fp2& x) const;
  Fp2 fp2_pow(const Fp2& x, const mpz_class& e) const;
  mpz_class inv_mod_p(const mpz_class& v) const;
  // Line through (doubling of T) or (T, A), evaluated at the distorted image
  // of Q; vertical lines are dropped (killed by the final exponentiation).
  Fp2 line_dbl(Point& t, const Point& q_dist_x, const mpz_class& q_y) const;
  Fp2 line_add(Point& t, const Point& a, const Point& q_dist_x,
               const mpz_class& q_y) const;

  mpz_class q_, p_, cofactor_;
  mpz_class exp_final_;  // (p^2 - 1) / q
  Point P_;
  unsigned kappa_ = 0;
  size_t p_width_ = 0;
  mutable std::atomic<uint64_t> pairings_{0};
};

struct SigKeypair {
  mpz_class secret;            // x in Z*_q
  PairingGroup::Point pub;     // Y = xP
};

struct GroupSignature {
  PairingGroup::Point sigma;
};

SigKeypair gen_sig_keypair(const PairingGroup& g, Rng& rng);

// BLS-style: sigma = x * H_sig(message). Throws std::invalid_argument on a
// zero scalar.
GroupSignature sign(const PairingGroup& g, const mpz_class& secret,
                    std::span<const uint8_t> message);
bool verify(const PairingGroup& g, const PairingGroup::Point& pub,
            std::span<const uint8_t> message, const GroupSignature& sig);

struct BatchEntry {
  PairingGroup::Point pub;
  Bytes message;
  GroupSignature sig;
};

struct BatchResult {
  bool ok = false;
  uint64_t pairing_count = 0;  // always len + 1
};

// e(P, sum sigma_j) == prod e(Y_j, H(m_j)); throws on an empty list.
BatchResult batch_verify(const PairingGroup& g,
                         std::span<const BatchEntry> entries);

struct HandshakePair {
  PairingGroup::Point processor_pub;  // Y_j
  PairingGroup::Point proof_jk;
  PairingGroup::Point proof_kj;
};

// e(Y_k, sum proof_jk) == prod e(Y_j, proof_kj); throws on an empty list.
bool batch_verify_handshake(const PairingGroup& g,
                            const PairingGroup::Point& customer_pub,
                            std::span<const HandshakePair> pairs);

inline constexpr std::string_view kSigDst = "TPCS-SIG";

}  // namespace tpcs
