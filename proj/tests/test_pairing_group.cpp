#include <doctest.h>

#include <vector>

#include "tpcs/pairing_group.hpp"

using namespace tpcs;

namespace {

std::shared_ptr<const PairingGroup> test_group() {
  static auto g = PairingGroup::generate(64);
  return g;
}

std::vector<BatchEntry> honest_entries(const PairingGroup& g, Rng& rng,
                                       size_t n) {
  std::vector<BatchEntry> entries;
  for (size_t i = 0; i < n; ++i) {
    auto kp = gen_sig_keypair(g, rng);
    Bytes msg = rng.bytes(32);
    entries.push_back({kp.pub, msg, sign(g, kp.secret, msg)});
  }
  return entries;
}

}  // namespace

TEST_CASE("parameter generation") {
  auto g = test_group();
  CHECK(mpz_sizeinbase(g->order().get_mpz_t(), 2) == 64);
  CHECK(mpz_probab_prime_p(g->order().get_mpz_t(), 32) != 0);
  CHECK(mpz_probab_prime_p(g->field_prime().get_mpz_t(), 32) != 0);
  // p + 1 = cofactor * q and p = 3 mod 4 (supersingular requirement)
  CHECK(g->field_prime() % 4 == 3);
  CHECK(g->on_curve(g->generator()));
  CHECK(g->mul(g->order(), g->generator()).inf);

  // same kappa twice -> identical parameters and generator encoding
  auto g2 = PairingGroup::generate(64);
  CHECK(g2->order() == g->order());
  CHECK(g2->encode(g2->generator()) == g->encode(g->generator()));
}

TEST_CASE("bilinearity and non-degeneracy") {
  auto g = test_group();
  Rng rng(21);
  Fp2 base = g->pair(g->generator(), g->generator());
  CHECK_FALSE(base == g->gt_identity());
  CHECK(g->gt_pow(base, g->order()) == g->gt_identity());
  for (int i = 0; i < 25; ++i) {
    mpz_class a = g->random_scalar(rng), b = g->random_scalar(rng);
    Fp2 lhs = g->pair(g->mul(a, g->generator()), g->mul(b, g->generator()));
    CHECK(lhs == g->gt_pow(base, a * b % g->order()));
  }
}

TEST_CASE("hash to group") {
  auto g = test_group();
  Bytes m1 = to_bytes("first input goes here for hashing"),
        m2 = to_bytes("second input goes here for hashing");
  auto h1 = g->hash_to_group(m1);
  CHECK(h1 == g->hash_to_group(m1));
  CHECK_FALSE(g->encode(h1) == g->encode(g->hash_to_group(m2)));
  CHECK(g->on_curve(h1));
  CHECK(g->mul(g->order(), h1).inf);  // cofactor cleared into the subgroup

  auto empty = g->hash_to_group(Bytes{});
  CHECK(g->on_curve(empty));
  CHECK_FALSE(empty.inf);
  // domain separation: same bytes, different tag, different point
  CHECK_FALSE(g->hash_to_group(m1, "TPCS-SIG") == h1);
}

TEST_CASE("sign and verify") {
  auto g = test_group();
  Rng rng(22);
  auto kp = gen_sig_keypair(*g, rng);
  Bytes msg = to_bytes("report payload");
  auto sig = sign(*g, kp.secret, msg);

  CHECK(verify(*g, kp.pub, msg, sig));
  CHECK(sign(*g, kp.secret, msg).sigma == sig.sigma);  // deterministic

  Bytes other = msg;
  other[0] ^= 1;
  CHECK_FALSE(verify(*g, kp.pub, other, sig));
  auto kp2 = gen_sig_keypair(*g, rng);
  CHECK_FALSE(verify(*g, kp2.pub, msg, sig));
  CHECK_FALSE(verify(*g, kp.pub, msg, GroupSignature{}));  // identity sigma
  CHECK_THROWS_AS(sign(*g, mpz_class(0), msg), std::invalid_argument);
}

TEST_CASE("batch verification counts and agreement") {
  auto g = test_group();
  Rng rng(23);

  auto one = honest_entries(*g, rng, 1);
  auto r1 = batch_verify(*g, one);
  CHECK(r1.ok);
  CHECK(r1.pairing_count == 2);

  auto fifty = honest_entries(*g, rng, 50);
  auto r50 = batch_verify(*g, fifty);
  CHECK(r50.ok);
  CHECK(r50.pairing_count == 51);

  fifty[17].sig.sigma = g->mul(3, fifty[17].sig.sigma);  // corrupt one
  auto bad = batch_verify(*g, fifty);
  CHECK_FALSE(bad.ok);
  CHECK(bad.pairing_count == 51);

  CHECK_THROWS(batch_verify(*g, std::span<const BatchEntry>{}));

  for (size_t n : {2, 5, 16}) {
    auto entries = honest_entries(*g, rng, n);
    bool all = true;
    for (const auto& e : entries) all &= verify(*g, e.pub, e.message, e.sig);
    CHECK(batch_verify(*g, entries).ok == all);
  }
}

TEST_CASE("pairing counter instrumentation") {
  auto g = test_group();
  Rng rng(24);
  auto entries = honest_entries(*g, rng, 7);
  g->reset_pairing_count();
  batch_verify(*g, entries);
  CHECK(g->pairing_count() == 8);
  g->reset_pairing_count();
  for (const auto& e : entries) verify(*g, e.pub, e.message, e.sig);
  CHECK(g->pairing_count() == 14);
}

TEST_CASE("handshake batch verification") {
  auto g = test_group();
  Rng rng(25);
  auto customer = gen_sig_keypair(*g, rng);
  std::vector<HandshakePair> pairs;
  for (int j = 0; j < 5; ++j) {
    auto proc = gen_sig_keypair(*g, rng);
    auto h = g->hash_to_group(rng.bytes(16));
    pairs.push_back({proc.pub, g->mul(proc.secret, h),
                     g->mul(customer.secret, h)});
  }
  CHECK(batch_verify_handshake(*g, customer.pub, pairs));

  // single pair reduces to the cross-pairing identity
  std::vector<HandshakePair> single{pairs[0]};
  CHECK(batch_verify_handshake(*g, customer.pub, single));
  CHECK(g->pair(customer.pub, single[0].proof_jk) ==
        g->pair(single[0].processor_pub, single[0].proof_kj));

  pairs[2].proof_jk = g->mul(g->random_scalar(rng), g->generator());
  CHECK_FALSE(batch_verify_handshake(*g, customer.pub, pairs));
  CHECK_THROWS(
      batch_verify_handshake(*g, customer.pub, std::span<const HandshakePair>{}));
}

TEST_CASE("point encoding") {
  auto g = test_group();
  Rng rng(26);
  for (int i = 0; i < 10; ++i) {
    auto p = g->mul(g->random_scalar(rng), g->generator());
    Bytes wire = g->encode(p);
    CHECK(wire.size() == g->element_size());
    CHECK(g->decode(wire) == p);
  }
  PairingGroup::Point inf;
  CHECK(g->decode(g->encode(inf)).inf);

  Bytes bogus(g->element_size(), 0xff);
  CHECK_THROWS_AS((void)g->decode(bogus), DecodeError);
  CHECK_THROWS_AS((void)g->decode(Bytes{0x02}), DecodeError);
}
