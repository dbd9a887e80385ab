#pragma once

#include <string>
#include <vector>

#include "tpcs/protocol_entities.hpp"

namespace tpcs {

enum class AttackKind {
  none,
  badmouth_internal,
  badmouth_external,
  onoff,
  fake_trust_collude,
  fake_trust_replay,
};

AttackKind attack_kind_from_string(const std::string& s);
const char* attack_kind_name(AttackKind k);

struct ScenarioConfig {
  unsigned kappa = 128;
  unsigned kappa1 = 128;
  size_t m_h = 10;   // customers
  size_t sum = 50;   // processors
  double rho = 0.2;  // malicious fraction
  // applied round-robin over the malicious cohort, so mixes are possible
  std::vector<AttackKind> attack_mix = {AttackKind::badmouth_internal};
  double honest_quality = 0.8;  // per-customer ground truth
  double noise_sigma = 0.02;
  double badmouth_feedback = 0.05;
  int onoff_good_rounds = 5;
  double onoff_attack_feedback = 0.05;
  int rounds = 10;
  uint64_t seed = 1;
  size_t pseudonyms = 5;
  unsigned eph_bits = 32;  // customer ephemeral Paillier primes
  EngineConfig engine;
  paillier::FixedPointCodec codec;
  // ablation switches for the link-attack experiment
  bool perturbation_enabled = true;
  bool pid_rotation_enabled = true;

  void validate() const;  // throws std::invalid_argument
};

ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

struct RejectionRecord {
  std::string pid_hex;
  std::string reason;
};

struct RoundMetrics {
  int round = 0;
  // (customer index, reputation per truth-discovery iteration)
  std::vector<std::pair<size_t, std::vector<double>>> reputation;
  // (real id, trust carried into next epoch, breaker flag)
  std::vector<std::tuple<std::string, double, bool>> trust;
  std::vector<RejectionRecord> rejections;
  std::vector<OpsRecord> ops;
  size_t submitted = 0;
  size_t accepted = 0;
  bool shadow_match = true;  // decrypted aggregates equal the plaintext sums
  std::vector<std::string> breaker_fired;  // real ids tripped this round
};

struct ScenarioResult {
  ScenarioConfig cfg;
  std::vector<RoundMetrics> rounds;
  size_t malicious_count = 0;
  // mean trust over the last round, honest vs malicious cohort
  double mean_honest_trust = 0.0;
  double mean_malicious_trust = 0.0;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Adversary pairing of two same-epoch task transcripts by exact token bytes
// and pseudonym equality; unmatched reports are guessed at random.
struct LinkProbeResult {
  double accuracy = 0.0;
  size_t reports = 0;
};

LinkProbeResult link_attack_probe(const ScenarioConfig& cfg);

// Writes reputation.csv, trust.csv, rejections.csv, ops.csv, summary.json.
void emit_results(const ScenarioResult& result, const std::string& out_dir);

// The four resilience scenarios with their assertions; returns the number of
// failed checks and prints one line per check.
int run_attack_suite(const ScenarioConfig& base, const std::string& out_dir);

// Crypto property suite used by the CLI selftest; returns failures.
int run_selftest();

}  // namespace tpcs
