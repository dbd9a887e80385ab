#include <doctest.h>

#include <vector>

#include "tpcs/trust_token.hpp"

using namespace tpcs;

namespace {

struct Fixture {
  paillier::Keypair kp;
  EpochSecret chi;
  Rng rng{31};

  Fixture() {
    kp = paillier::keygen(64, rng);
    chi.chi = rng.mpz_coprime(kp.pk.n);
  }
};

}  // namespace

TEST_CASE("issue satisfies the freshness identity and decrypts") {
  Fixture f;
  auto tok = issue(f.kp.pk, f.chi, 787, 3, f.rng);
  CHECK(tok.epoch == 3);
  CHECK(verify_fresh(f.kp.pk, f.chi, tok, 3));
  CHECK(paillier::decrypt(f.kp.sk, f.kp.pk, tok.c_trust) == 787);
  // the signature component carries trust + H1(epoch || chi) mod n
  mpz_class h = epoch_hash(f.kp.pk, f.chi, 3);
  CHECK(paillier::decrypt(f.kp.sk, f.kp.pk, tok.c_sig) ==
        (787 + h) % f.kp.pk.n);
}

TEST_CASE("epoch hash is a unit and epoch-sensitive") {
  Fixture f;
  mpz_class h3 = epoch_hash(f.kp.pk, f.chi, 3);
  mpz_class h4 = epoch_hash(f.kp.pk, f.chi, 4);
  CHECK(h3 != h4);
  CHECK(h3 == epoch_hash(f.kp.pk, f.chi, 3));
  mpz_class d;
  mpz_gcd(d.get_mpz_t(), h3.get_mpz_t(), f.kp.pk.n.get_mpz_t());
  CHECK(d == 1);
}

TEST_CASE("perturbation preserves plaintext and freshness, changes bytes") {
  Fixture f;
  auto tok = issue(f.kp.pk, f.chi, 100, 1, f.rng);
  auto cur = tok;
  for (int i = 0; i < 100; ++i) {
    auto next = perturb(f.kp.pk, cur, f.rng);
    CHECK(serialize_token(f.kp.pk, next) != serialize_token(f.kp.pk, cur));
    cur = next;
  }
  // composed perturbations still verify and decrypt identically
  CHECK(verify_fresh(f.kp.pk, f.chi, cur, 1));
  CHECK(paillier::decrypt(f.kp.sk, f.kp.pk, cur.c_trust) == 100);
}

TEST_CASE("epoch binding") {
  Fixture f;
  auto tok = issue(f.kp.pk, f.chi, 100, 5, f.rng);
  CHECK(verify_fresh(f.kp.pk, f.chi, tok, 5));
  CHECK_FALSE(verify_fresh(f.kp.pk, f.chi, tok, 6));
  auto relabeled = tok;
  relabeled.epoch = 6;  // stamp rewritten, algebra still bound to epoch 5
  CHECK_FALSE(verify_fresh(f.kp.pk, f.chi, relabeled, 6));
}

TEST_CASE("collusion product fails freshness") {
  Fixture f;
  auto a = issue(f.kp.pk, f.chi, 100, 2, f.rng);
  auto b = issue(f.kp.pk, f.chi, 9000, 2, f.rng);
  TrustToken prod{paillier::Ciphertext{a.c_trust.c * b.c_trust.c % f.kp.pk.n2},
                  paillier::Ciphertext{a.c_sig.c * b.c_sig.c % f.kp.pk.n2}, 2};
  CHECK_FALSE(verify_fresh(f.kp.pk, f.chi, prod, 2));
}

TEST_CASE("random malformed pairs are rejected") {
  Fixture f;
  int rejected = 0;
  for (int i = 0; i < 200; ++i) {
    TrustToken junk{paillier::Ciphertext{f.rng.mpz_coprime(f.kp.pk.n2)},
                    paillier::Ciphertext{f.rng.mpz_coprime(f.kp.pk.n2)}, 4};
    if (!verify_fresh(f.kp.pk, f.chi, junk, 4)) ++rejected;
  }
  CHECK(rejected == 200);
}

TEST_CASE("batch freshness") {
  Fixture f;
  std::vector<TrustToken> tokens;
  for (int i = 0; i < 50; ++i)
    tokens.push_back(issue(f.kp.pk, f.chi, 100 + i, 9, f.rng));
  CHECK(batch_verify_fresh(f.kp.pk, f.chi, tokens, 9));

  // single token reduces to the individual check
  std::vector<TrustToken> one{tokens[0]};
  CHECK(batch_verify_fresh(f.kp.pk, f.chi, one, 9));
  CHECK_FALSE(batch_verify_fresh(f.kp.pk, f.chi, one, 10));

  // one replay poisons the batch
  auto replay = issue(f.kp.pk, f.chi, 100, 8, f.rng);
  replay.epoch = 9;
  tokens[31] = replay;
  CHECK_FALSE(batch_verify_fresh(f.kp.pk, f.chi, tokens, 9));

  CHECK_THROWS(batch_verify_fresh(f.kp.pk, f.chi, {}, 9));
  std::vector<TrustToken> mixed{issue(f.kp.pk, f.chi, 1, 9, f.rng),
                                issue(f.kp.pk, f.chi, 1, 8, f.rng)};
  CHECK_THROWS(batch_verify_fresh(f.kp.pk, f.chi, mixed, 9));
}

TEST_CASE("batch equals conjunction of individual checks") {
  Fixture f;
  for (size_t n : {1, 2, 7, 16, 33, 64}) {
    std::vector<TrustToken> tokens;
    for (size_t i = 0; i < n; ++i)
      tokens.push_back(issue(f.kp.pk, f.chi, long(i), 12, f.rng));
    bool all = true;
    for (const auto& t : tokens) all &= verify_fresh(f.kp.pk, f.chi, t, 12);
    CHECK(batch_verify_fresh(f.kp.pk, f.chi, tokens, 12) == all);
  }
}

TEST_CASE("wire format") {
  Fixture f;
  auto tok = issue(f.kp.pk, f.chi, 4321, 0x0102030405060708ull, f.rng);
  Bytes wire = serialize_token(f.kp.pk, tok);
  CHECK(wire.size() == 8 + 2 * f.kp.pk.ciphertext_width());
  CHECK(wire[0] == 0x01);  // big-endian epoch leads
  CHECK(wire[7] == 0x08);
  auto back = parse_token(f.kp.pk, wire);
  CHECK(back.epoch == tok.epoch);
  CHECK(back.c_trust == tok.c_trust);
  CHECK(back.c_sig == tok.c_sig);
  wire.pop_back();
  CHECK_THROWS_AS((void)parse_token(f.kp.pk, wire), DecodeError);
}
