#include <doctest.h>

#include "tpcs/paillier.hpp"

using namespace tpcs;
using namespace tpcs::paillier;

namespace {

// Shared toy key: p1=5, q1=7, so n=35 and everything is hand-checkable.
Keypair toy() { return from_primes(5, 7); }

Keypair test_key() {
  static Keypair kp = [] {
    Rng rng(7);
    return keygen(64, rng);
  }();
  return kp;
}

}  // namespace

TEST_CASE("toy key parameters") {
  auto kp = toy();
  CHECK(kp.pk.n == 35);
  CHECK(kp.pk.g == 36);
  CHECK(kp.pk.n2 == 1225);
  CHECK(kp.sk.lambda == 12);  // lcm(4, 6)
}

TEST_CASE("toy encryption matches the modular-exponentiation oracle") {
  auto kp = toy();
  auto c = encrypt(kp.pk, 3, mpz_class(2));
  mpz_class want;
  mpz_class g = 36, r = 2, n2 = 1225;
  mpz_powm_ui(want.get_mpz_t(), g.get_mpz_t(), 3, n2.get_mpz_t());
  mpz_class rn;
  mpz_class e = 35;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), e.get_mpz_t(), n2.get_mpz_t());
  want = want * rn % n2;
  CHECK(c.c == want);
  CHECK(decrypt(kp.sk, kp.pk, c) == 3);
}

TEST_CASE("identity cases") {
  auto kp = toy();
  CHECK(encrypt(kp.pk, 0, mpz_class(1)).c == 1);  // (n+1)^0 * 1^n
  Rng rng(1);
  CHECK(decrypt(kp.sk, kp.pk, encrypt(kp.pk, 0, rng)) == 0);
}

TEST_CASE("roundtrip on random plaintexts") {
  auto kp = test_key();
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    mpz_class m = rng.mpz_below(kp.pk.n);
    CHECK(decrypt(kp.sk, kp.pk, encrypt(kp.pk, m, rng)) == m);
  }
}

TEST_CASE("additive homomorphism") {
  auto kp = test_key();
  Rng rng(12);
  auto c2 = encrypt(kp.pk, 2, rng);
  auto c3 = encrypt(kp.pk, 3, rng);
  CHECK(decrypt(kp.sk, kp.pk, add(kp.pk, c2, c3)) == 5);

  auto c = encrypt(kp.pk, 17, rng);
  auto same = add(kp.pk, c, encrypt(kp.pk, 0, rng));
  CHECK(decrypt(kp.sk, kp.pk, same) == 17);

  Ciphertext acc{1};
  for (int i = 0; i < 50; ++i) acc = add(kp.pk, acc, encrypt(kp.pk, 1, rng));
  CHECK(decrypt(kp.sk, kp.pk, acc) == 50);

  for (int i = 0; i < 50; ++i) {
    mpz_class a = rng.mpz_below(kp.pk.n), b = rng.mpz_below(kp.pk.n);
    auto sum = add(kp.pk, encrypt(kp.pk, a, rng), encrypt(kp.pk, b, rng));
    CHECK(decrypt(kp.sk, kp.pk, sum) == (a + b) % kp.pk.n);
  }
}

TEST_CASE("scalar homomorphism") {
  auto kp = test_key();
  Rng rng(13);
  auto c3 = encrypt(kp.pk, 3, rng);
  CHECK(decrypt(kp.sk, kp.pk, scalar_mul(kp.pk, c3, 1)) == 3);
  CHECK(decrypt(kp.sk, kp.pk, scalar_mul(kp.pk, c3, 0)) == 0);
  CHECK(decrypt(kp.sk, kp.pk, scalar_mul(kp.pk, c3, 4)) == 12);
  for (int i = 0; i < 50; ++i) {
    mpz_class a = rng.mpz_below(kp.pk.n), k = rng.mpz_below(kp.pk.n);
    auto c = scalar_mul(kp.pk, encrypt(kp.pk, a, rng), k);
    CHECK(decrypt(kp.sk, kp.pk, c) == a * k % kp.pk.n);
  }
}

TEST_CASE("re-randomization changes bytes, not plaintext") {
  auto kp = test_key();
  Rng rng(14);
  mpz_class r1 = rng.mpz_coprime(kp.pk.n), r2 = rng.mpz_coprime(kp.pk.n);
  REQUIRE(r1 != r2);
  auto a = encrypt(kp.pk, 9, r1), b = encrypt(kp.pk, 9, r2);
  CHECK(a.c != b.c);
  CHECK(decrypt(kp.sk, kp.pk, a) == decrypt(kp.sk, kp.pk, b));
}

TEST_CASE("argument validation") {
  auto kp = toy();
  CHECK_THROWS(encrypt(kp.pk, 35, mpz_class(2)));   // m >= n
  CHECK_THROWS(encrypt(kp.pk, -1, mpz_class(2)));   // m < 0
  CHECK_THROWS(encrypt(kp.pk, 3, mpz_class(5)));    // gcd(r, n) != 1
  CHECK_THROWS(decrypt(kp.sk, kp.pk, Ciphertext{35}));
  CHECK_THROWS(scalar_mul(kp.pk, Ciphertext{36}, mpz_class(35)));
  Rng rng(1);
  CHECK_THROWS(keygen(8, rng));
}

TEST_CASE("keygen determinism") {
  Rng a(99), b(99);
  CHECK(keygen(32, a).pk.n == keygen(32, b).pk.n);
}

TEST_CASE("ciphertext serialization fixed width") {
  auto kp = test_key();
  Rng rng(15);
  auto c = encrypt(kp.pk, 1234, rng);
  Bytes wire = serialize(kp.pk, c);
  CHECK(wire.size() == kp.pk.ciphertext_width());
  CHECK(deserialize(kp.pk, wire) == c);
  wire.pop_back();
  CHECK_THROWS_AS((void)deserialize(kp.pk, wire), DecodeError);
}

TEST_CASE("fixed-point codec") {
  FixedPointCodec codec;
  CHECK(codec.encode_trust(0.787) == 7870);
  CHECK(codec.encode_feedback(0.0) == 0);
  CHECK(codec.encode_trust(1.0) == 10000);
  CHECK(codec.decode_trust(7870) == doctest::Approx(0.787));
  CHECK_THROWS(codec.encode_trust(1.01));
  CHECK_THROWS(codec.encode_feedback(-0.01));
  // worst case: sum * S_T * S_F must stay below n
  CHECK(codec.sum_fits(50, mpz_class(1) << 40));
  CHECK_FALSE(codec.sum_fits(50, mpz_class(1) << 28));
}
