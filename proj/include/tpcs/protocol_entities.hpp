#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tpcs/pairing_group.hpp"
#include "tpcs/paillier.hpp"
#include "tpcs/reputation_engine.hpp"
#include "tpcs/trust_token.hpp"

namespace tpcs {

struct Pseudonym {
  Bytes pid;  // AES-GCM(k0, real_id || x) with a deterministic nonce
  SigKeypair keys;
};

struct Identity {
  Bytes real_id;
  std::vector<Pseudonym> pseudonyms;
};

// ---------------------------------------------------------------------------
// Reports (the three wire artifacts)

struct FeedbackReport {
  Bytes customer_pid;  // ph_k
  Bytes task_id;       // Tr_k
  long feedback;       // fixed-point, feedback_scale units
};

struct ProcessorReport {
  Bytes pid;
  PairingGroup::Point pub;  // Y_j
  FeedbackReport fr;
  TrustToken tr;  // perturbed token; epoch rides inside
  PairingGroup::Point proof_jk;
  GroupSignature sig;
};

struct CustomerReport {
  Bytes pid;  // ph_k
  Bytes task_id;
  PairingGroup::Point pub;  // Y_k
  // proof_kj keyed by processor pseudonym so RSU can pair them up
  std::vector<std::pair<Bytes, PairingGroup::Point>> proofs;
  GroupSignature sig;
};

struct AggregatedReport {
  Bytes customer_pid;
  Bytes task_id;
  paillier::Ciphertext c1;  // prod token^f, decrypts to sum T*f
  paillier::Ciphertext c2;  // prod token,   decrypts to sum T
  std::vector<std::pair<Bytes, long>> entries;  // (PID_j, f_j fixed-point)
  PairingGroup::Point rsu_pub;
  GroupSignature sig;
};

// Canonical signing serializations (fixed field order, length-prefixed).
Bytes processor_report_message(const PairingGroup& g,
                               const paillier::PublicKey& pk,
                               const ProcessorReport& r);
Bytes customer_report_message(const PairingGroup& g, const CustomerReport& r);
Bytes aggregated_report_message(const PairingGroup& g,
                                const paillier::PublicKey& pk,
                                const AggregatedReport& r);

// ---------------------------------------------------------------------------
// Role state

struct ProcessorState {
  Identity identity;
  size_t next_pseudonym = 0;
  bool pseudonym_wrapped = false;  // rotation exhausted at least once
  TrustToken token;
  std::optional<TrustToken> previous_token;  // kept for replay experiments
};

struct CustomerState {
  Identity identity;
  size_t next_pseudonym = 0;
};

struct RsuState {
  paillier::PublicKey pk;  // (n, g)
  EpochSecret chi;
  SigKeypair keys;  // (x_r, Y_r)
};

struct SpState {
  paillier::PublicKey pk;
  paillier::SecretKey sk;  // lambda, mu
  PairingGroup::Point rsu_pub;
  paillier::FixedPointCodec codec;
  EngineConfig engine;
  // latest reputation per customer pseudonym, insertion-ordered
  std::vector<std::pair<Bytes, double>> reputations;
};

struct LedgerEntry {
  std::vector<double> history;  // trust per completed round
  bool breaker = false;
  double predicted = 0.0;  // value carried by the current token
};

struct TaState {
  Bytes k0;  // AES-256 key for pseudonym issue/recovery
  paillier::PublicKey pk;
  paillier::SecretKey sk;
  EpochSecret chi;
  EngineConfig engine;
  paillier::FixedPointCodec codec;
  std::map<Bytes, LedgerEntry> ledger;  // keyed by real id
  std::vector<std::string> dropped_pids;  // log of unresolvable reports
};

struct System {
  std::shared_ptr<const PairingGroup> group;
  TaState ta;
  SpState sp;
  RsuState rsu;
  std::vector<CustomerState> customers;
  std::vector<ProcessorState> processors;
  uint64_t epoch = 1;
  // Which parameters each role received at init; lets tests assert the
  // distribution boundaries (SP never sees chi or k0, RSU never sees sk).
  std::map<std::string, std::vector<std::string>> delivered_params;
};

struct InitConfig {
  unsigned kappa = 128;
  unsigned kappa1 = 128;
  size_t num_customers = 10;
  size_t num_processors = 50;
  size_t pseudonyms_per_entity = 5;
  paillier::FixedPointCodec codec;
  EngineConfig engine;
};

System ta_init(const InitConfig& cfg, Rng& rng);

// Pseudonym helpers (TA side).
Bytes make_pid(const Bytes& k0, const Bytes& real_id, const mpz_class& x,
               size_t index, size_t q_width);
std::optional<std::pair<Bytes, mpz_class>> open_pid(const Bytes& k0,
                                                    const Bytes& pid);

// ---------------------------------------------------------------------------
// Handshake

struct HandshakeProof {
  mpz_class alpha_k, alpha_j;
  PairingGroup::Point proof_kj, proof_jk;
};

// Customer-side per-task context: pseudonym in use, broadcast alpha_k, the
// ephemeral Paillier key that transports each alpha_j, and collected proofs.
struct CustomerTaskContext {
  size_t customer_index = 0;
  size_t pseudonym_index = 0;
  Bytes task_id;
  mpz_class alpha_k;
  paillier::Keypair ephemeral;
  std::vector<std::pair<Bytes, PairingGroup::Point>> proofs;  // by proc pid
};

CustomerTaskContext customer_start_task(CustomerState& customer,
                                        size_t customer_index,
                                        const Bytes& task_id, unsigned eph_bits,
                                        Rng& rng, bool rotate_pseudonym = true);

// Runs the alpha exchange for one processor; returns the processor-side proof
// and appends proof_kj to the customer context. Throws on transport mismatch.
HandshakeProof do_handshake(const PairingGroup& g, CustomerTaskContext& ctx,
                            const CustomerState& customer,
                            ProcessorState& processor, size_t pseudonym_index,
                            Rng& rng);

CustomerReport customer_make_report(const PairingGroup& g,
                                    const CustomerState& customer,
                                    const CustomerTaskContext& ctx);

// token_override, when non-null, is submitted as-is (signed but neither
// perturbed nor checked); the hook the fake-trust experiments use.
ProcessorReport processor_make_report(
    const PairingGroup& g, const paillier::PublicKey& pk,
    ProcessorState& processor, const Bytes& customer_pid, const Bytes& task_id,
    long feedback, const PairingGroup::Point& proof_jk, Rng& rng,
    bool rotate_pseudonym = true, bool perturb_token = true,
    const TrustToken* token_override = nullptr);

// ---------------------------------------------------------------------------
// RSU aggregation

enum class RejectReason { signature, handshake, fake_trust };
const char* reject_reason_name(RejectReason r);

struct Rejection {
  Bytes pid;
  RejectReason reason;
};

struct OpsRecord {
  std::string check_type;
  uint64_t pairing_count = 0;
  size_t batch_size = 0;
};

struct RsuResult {
  AggregatedReport report;
  std::vector<Rejection> rejections;
  std::vector<OpsRecord> ops;
};

// Signature, handshake, and freshness batch checks with individual fallback to
// isolate offenders, then homomorphic aggregation and the RSU signature.
// Throws if every report is rejected.
RsuResult rsu_process(const PairingGroup& g, const RsuState& rsu,
                      const CustomerReport& customer_report,
                      const std::vector<ProcessorReport>& reports,
                      uint64_t epoch);

// ---------------------------------------------------------------------------
// SP scoring and TA ledger

struct SpEvaluation {
  double initial_rs = 0.0;  // decrypted ratio
  TruthDiscoveryResult discovery;
  std::vector<std::pair<Bytes, double>> trust_updates;  // (PID_j, T_j)
};

// Verifies sigma_r, decrypts the aggregate, runs truth discovery, and scores
// each contributing processor. Throws on a bad signature or zero denominator.
SpEvaluation sp_score(const PairingGroup& g, SpState& sp,
                      const AggregatedReport& report);

struct LedgerUpdate {
  Bytes real_id;
  double trust = 0.0;  // value carried by the newly issued token
  bool breaker = false;
  bool breaker_fired_now = false;
  TrustToken token;
};

// Resolves PIDs with k0 (duplicates for one identity are averaged), applies
// EWMA + circuit-breaker, and issues next-epoch tokens.
std::vector<LedgerUpdate> ta_update_ledger(
    TaState& ta, const std::vector<std::pair<Bytes, double>>& trust_updates,
    uint64_t next_epoch, Rng& rng);

// Regular-interval reissue for identities that did not appear in this round's
// reports: same predicted trust, new epoch, fresh randomness.
std::vector<LedgerUpdate> ta_reissue_tokens(TaState& ta,
                                            const std::vector<Bytes>& skip,
                                            uint64_t next_epoch, Rng& rng);

// Customers ranked by latest reputation, descending; ties by pid ascending.
std::vector<std::pair<Bytes, double>> query_customers(const SpState& sp);

}  // namespace tpcs
