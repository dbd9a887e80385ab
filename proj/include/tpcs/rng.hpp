#pragma once

#include <cstdint>
#include <random>

#include <gmpxx.h>

#include "tpcs/bytes.hpp"

namespace tpcs {

// Deterministic random source for the whole simulator. Every piece of
// protocol randomness (keys, nonces, feedback noise) is drawn from one of
// these, so a (config, seed) pair fully determines a run.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t u64() { return gen_(); }
  double uniform01();
  // Box-Muller, hand rolled so output does not depend on the standard
  // library's distribution implementation.
  double normal(double mean, double sigma);

  Bytes bytes(size_t n);
  // Uniform in [0, 2^bits).
  mpz_class mpz_bits(unsigned bits);
  // Uniform in [0, bound).
  mpz_class mpz_below(const mpz_class& bound);
  // Uniform in [1, bound) with gcd(result, bound) = 1.
  mpz_class mpz_coprime(const mpz_class& bound);
  // Random probable prime with exactly `bits` bits.
  mpz_class prime(unsigned bits);

  // Derive an independent child stream; used so parallel-safe subcomponents
  // never interleave draws.
  Rng fork();

 private:
  std::mt19937_64 gen_;
};

}  // namespace tpcs
