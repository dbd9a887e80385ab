#include "tpcs/pairing_group.hpp"

#include <stdexcept>

#include "tpcs/hash.hpp"

namespace tpcs {

namespace {

mpz_class mod(const mpz_class& v, const mpz_class& p) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), p.get_mpz_t());
  return r;
}

uint64_t derive_seed(std::string_view tag, unsigned kappa) {
  Bytes msg;
  msg.insert(msg.end(), tag.begin(), tag.end());
  append_u32_be(msg, kappa);
  auto d = sha256(msg);
  uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s = (s << 8) | d[i];
  return s;
}

}  // namespace

Fp2 PairingGroup::fp2_mul(const Fp2& x, const Fp2& y) const {
  // (a1 + b1 i)(a2 + b2 i), i^2 = -1
  mpz_class aa = x.a * y.a, bb = x.b * y.b;
  mpz_class ab = x.a * y.b + x.b * y.a;
  return Fp2{mod(aa - bb, p_), mod(ab, p_)};
}

Fp2 PairingGroup::fp2_sqr(const Fp2& x) const { return fp2_mul(x, x); }

Fp2 PairingGroup::fp2_pow(const Fp2& x, const mpz_class& e) const {
  Fp2 result{1, 0};
  Fp2 base = x;
  size_t bits = (e == 0) ? 0 : mpz_sizeinbase(e.get_mpz_t(), 2);
  for (size_t i = 0; i < bits; ++i) {
    if (mpz_tstbit(e.get_mpz_t(), i)) result = fp2_mul(result, base);
    base = fp2_sqr(base);
  }
  return result;
}

mpz_class PairingGroup::inv_mod_p(const mpz_class& v) const {
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), v.get_mpz_t(), p_.get_mpz_t()) == 0)
    throw std::runtime_error("inverse of non-unit mod p");
  return r;
}

bool PairingGroup::on_curve(const Point& a) const {
  if (a.inf) return true;
  mpz_class lhs = mod(a.y * a.y, p_);
  mpz_class rhs = mod(a.x * a.x * a.x + a.x, p_);
  return lhs == rhs;
}

PairingGroup::Point PairingGroup::neg(const Point& a) const {
  if (a.inf) return a;
  return Point{a.x, mod(-a.y, p_), false};
}

PairingGroup::Point PairingGroup::dbl(const Point& a) const {
  if (a.inf || a.y == 0) return Point{};
  mpz_class lambda = mod((3 * a.x * a.x + 1) * inv_mod_p(mod(2 * a.y, p_)), p_);
  mpz_class x3 = mod(lambda * lambda - 2 * a.x, p_);
  mpz_class y3 = mod(lambda * (a.x - x3) - a.y, p_);
  return Point{x3, y3, false};
}

PairingGroup::Point PairingGroup::add(const Point& a, const Point& b) const {
  if (a.inf) return b;
  if (b.inf) return a;
  if (a.x == b.x) {
    if (a.y == b.y) return dbl(a);
    return Point{};
  }
  mpz_class lambda = mod((b.y - a.y) * inv_mod_p(mod(b.x - a.x, p_)), p_);
  mpz_class x3 = mod(lambda * lambda - a.x - b.x, p_);
  mpz_class y3 = mod(lambda * (a.x - x3) - a.y, p_);
  return Point{x3, y3, false};
}

PairingGroup::Point PairingGroup::mul(const mpz_class& k, const Point& a) const {
  mpz_class e = mod(k, q_);
  Point result{};
  Point base = a;
  size_t bits = (e == 0) ? 0 : mpz_sizeinbase(e.get_mpz_t(), 2);
  for (size_t i = 0; i < bits; ++i) {
    if (mpz_tstbit(e.get_mpz_t(), i)) result = add(result, base);
    base = dbl(base);
  }
  return result;
}

PairingGroup::Point PairingGroup::hash_to_group(std::span<const uint8_t> msg,
                                                std::string_view dst) const {
  size_t want = p_width_ + 16;  // oversample to make the mod-p bias negligible
  for (uint32_t attempt = 0; attempt < 1u << 16; ++attempt) {
    Bytes attempt_msg(msg.begin(), msg.end());
    append_u32_be(attempt_msg, attempt);
    Bytes stream = xof(dst, attempt_msg, want);
    mpz_class x = mod(mpz_from_bytes(stream), p_);
    mpz_class rhs = mod(x * x * x + x, p_);
    if (rhs == 0) continue;
    // p = 3 mod 4: candidate root is rhs^((p+1)/4)
    mpz_class e = (p_ + 1) / 4;
    mpz_class y;
    mpz_powm(y.get_mpz_t(), rhs.get_mpz_t(), e.get_mpz_t(), p_.get_mpz_t());
    if (mod(y * y, p_) != rhs) continue;  // non-residue
    if (mpz_tstbit(y.get_mpz_t(), 0)) y = p_ - y;  // canonical even root
    Point candidate{x, y, false};
    Point cleared = mul(cofactor_, candidate);
    if (!cleared.inf) return cleared;
  }
  throw std::runtime_error("hash_to_group: no point found");
}

Fp2 PairingGroup::line_dbl(Point& t, const Point& q_dist_x,
                           const mpz_class& q_y) const {
  if (t.inf) return Fp2{1, 0};
  if (t.y == 0) {  // vertical tangent; contribution killed by final exp
    t = Point{};
    return Fp2{1, 0};
  }
  mpz_class lambda = mod((3 * t.x * t.x + 1) * inv_mod_p(mod(2 * t.y, p_)), p_);
  // evaluate y_dist - y_t - lambda*(x_dist - x_t); y_dist = i*q_y is purely
  // imaginary and x_dist lies in F_p, so the value is (-yt - lambda*dx) + i*q_y
  mpz_class real = mod(-t.y - lambda * (q_dist_x.x - t.x), p_);
  mpz_class x3 = mod(lambda * lambda - 2 * t.x, p_);
  mpz_class y3 = mod(lambda * (t.x - x3) - t.y, p_);
  t = Point{x3, y3, false};
  return Fp2{real, q_y};
}

Fp2 PairingGroup::line_add(Point& t, const Point& a, const Point& q_dist_x,
                           const mpz_class& q_y) const {
  if (t.inf) {
    t = a;
    return Fp2{1, 0};
  }
  if (a.inf) return Fp2{1, 0};
  if (t.x == a.x) {
    if (t.y == a.y) return line_dbl(t, q_dist_x, q_y);
    t = Point{};  // vertical chord
    return Fp2{1, 0};
  }
  mpz_class lambda = mod((a.y - t.y) * inv_mod_p(mod(a.x - t.x, p_)), p_);
  mpz_class real = mod(-t.y - lambda * (q_dist_x.x - t.x), p_);
  mpz_class x3 = mod(lambda * lambda - t.x - a.x, p_);
  mpz_class y3 = mod(lambda * (t.x - x3) - t.y, p_);
  t = Point{x3, y3, false};
  return Fp2{real, q_y};
}

Fp2 PairingGroup::pair(const Point& a, const Point& b) const {
  pairings_.fetch_add(1, std::memory_order_relaxed);
  if (a.inf || b.inf) return Fp2{1, 0};
  // distortion map phi(b) = (-x_b, i*y_b)
  Point dist_x{mod(-b.x, p_), 0, false};
  mpz_class q_y = b.y;
  Fp2 f{1, 0};
  Point t = a;
  size_t bits = mpz_sizeinbase(q_.get_mpz_t(), 2);
  for (size_t i = bits - 1; i-- > 0;) {
    f = fp2_sqr(f);
    f = fp2_mul(f, line_dbl(t, dist_x, q_y));
    if (mpz_tstbit(q_.get_mpz_t(), i)) {
      f = fp2_mul(f, line_add(t, a, dist_x, q_y));
    }
  }
  return fp2_pow(f, exp_final_);
}

std::shared_ptr<const PairingGroup> PairingGroup::generate(unsigned kappa_bits) {
  if (kappa_bits < 32 || kappa_bits > 1024)
    throw std::invalid_argument("gen_params: unsupported kappa");
  auto g = std::shared_ptr<PairingGroup>(new PairingGroup());
  g->kappa_ = kappa_bits;
  Rng rng(derive_seed("tpcs-pairing-v1", kappa_bits));
  g->q_ = rng.prime(kappa_bits);
  // p + 1 = c*q with 4 | c keeps p = 3 mod 4, so the curve is supersingular
  // and square roots are a single exponentiation.
  for (mpz_class c = 4;; c += 4) {
    mpz_class p = c * g->q_ - 1;
    if (mpz_probab_prime_p(p.get_mpz_t(), 32) > 0) {
      g->p_ = p;
      g->cofactor_ = c;
      break;
    }
  }
  g->p_width_ = (mpz_sizeinbase(g->p_.get_mpz_t(), 2) + 7) / 8;
  g->exp_final_ = (g->p_ * g->p_ - 1) / g->q_;
  Bytes seed_msg = to_bytes("generator");
  g->P_ = g->hash_to_group(seed_msg, "TPCS-GEN");
  if (g->P_.inf || !g->mul(g->q_, g->P_).inf)
    throw std::runtime_error("gen_params: bad generator");
  Fp2 base = g->pair(g->P_, g->P_);
  g->reset_pairing_count();
  if (base == g->gt_identity())
    throw std::runtime_error("gen_params: degenerate pairing");
  return g;
}

mpz_class PairingGroup::random_scalar(Rng& rng) const {
  return 1 + rng.mpz_below(q_ - 1);
}

Bytes PairingGroup::encode(const Point& a) const {
  Bytes out;
  if (a.inf) {
    out.push_back(0x00);
    out.resize(element_size(), 0);
    return out;
  }
  out.push_back(mpz_tstbit(a.y.get_mpz_t(), 0) ? 0x03 : 0x02);
  Bytes x = mpz_to_bytes(a.x, p_width_);
  out.insert(out.end(), x.begin(), x.end());
  return out;
}

PairingGroup::Point PairingGroup::decode(std::span<const uint8_t> in) const {
  if (in.size() != element_size()) throw DecodeError("point: bad length");
  uint8_t tag = in[0];
  if (tag == 0x00) {
    for (size_t i = 1; i < in.size(); ++i)
      if (in[i] != 0) throw DecodeError("point: bad infinity encoding");
    return Point{};
  }
  if (tag != 0x02 && tag != 0x03) throw DecodeError("point: bad tag");
  mpz_class x = mpz_from_bytes(in.subspan(1));
  if (x >= p_) throw DecodeError("point: x out of range");
  mpz_class rhs = mod(x * x * x + x, p_);
  mpz_class e = (p_ + 1) / 4;
  mpz_class y;
  mpz_powm(y.get_mpz_t(), rhs.get_mpz_t(), e.get_mpz_t(), p_.get_mpz_t());
  if (mod(y * y, p_) != rhs) throw DecodeError("point: not on curve");
  bool want_odd = (tag == 0x03);
  if (bool(mpz_tstbit(y.get_mpz_t(), 0)) != want_odd) y = p_ - y;
  Point pt{x, y, false};
  if (!mul(q_, pt).inf) throw DecodeError("point: wrong subgroup");
  return pt;
}

SigKeypair gen_sig_keypair(const PairingGroup& g, Rng& rng) {
  mpz_class x = g.random_scalar(rng);
  return SigKeypair{x, g.mul(x, g.generator())};
}

GroupSignature sign(const PairingGroup& g, const mpz_class& secret,
                    std::span<const uint8_t> message) {
  mpz_class x = secret % g.order();
  if (x == 0) throw std::invalid_argument("sign: zero scalar");
  auto h = g.hash_to_group(message, kSigDst);
  return GroupSignature{g.mul(x, h)};
}

bool verify(const PairingGroup& g, const PairingGroup::Point& pub,
            std::span<const uint8_t> message, const GroupSignature& sig) {
  auto h = g.hash_to_group(message, kSigDst);
  return g.pair(g.generator(), sig.sigma) == g.pair(pub, h);
}

BatchResult batch_verify(const PairingGroup& g,
                         std::span<const BatchEntry> entries) {
  if (entries.empty()) throw std::invalid_argument("batch_verify: empty list");
  PairingGroup::Point sum{};
  for (const auto& e : entries) sum = g.add(sum, e.sig.sigma);
  Fp2 lhs = g.pair(g.generator(), sum);
  Fp2 rhs = g.gt_identity();
  for (const auto& e : entries) {
    auto h = g.hash_to_group(e.message, kSigDst);
    rhs = g.gt_mul(rhs, g.pair(e.pub, h));
  }
  return BatchResult{lhs == rhs, uint64_t(entries.size()) + 1};
}

bool batch_verify_handshake(const PairingGroup& g,
                            const PairingGroup::Point& customer_pub,
                            std::span<const HandshakePair> pairs) {
  if (pairs.empty())
    throw std::invalid_argument("batch_verify_handshake: empty list");
  PairingGroup::Point sum{};
  for (const auto& p : pairs) sum = g.add(sum, p.proof_jk);
  Fp2 lhs = g.pair(customer_pub, sum);
  Fp2 rhs = g.gt_identity();
  for (const auto& p : pairs)
    rhs = g.gt_mul(rhs, g.pair(p.processor_pub, p.proof_kj));
  return lhs == rhs;
}

}  // namespace tpcs
