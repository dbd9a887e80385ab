#include "tpcs/protocol_entities.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <openssl/evp.h>

#include "tpcs/hash.hpp"

namespace tpcs {

namespace {

constexpr size_t kNonceLen = 12;
constexpr size_t kTagLen = 16;

Bytes aes_gcm_seal(const Bytes& key, const Bytes& nonce, const Bytes& plain) {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw std::runtime_error("EVP ctx alloc");
  Bytes out(plain.size());
  Bytes tag(kTagLen);
  int len = 0;
  bool ok = EVP_EncryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(),
                               nonce.data()) == 1 &&
            EVP_EncryptUpdate(ctx, out.data(), &len, plain.data(),
                              int(plain.size())) == 1 &&
            EVP_EncryptFinal_ex(ctx, out.data() + len, &len) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, int(kTagLen),
                                tag.data()) == 1;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) throw std::runtime_error("AES-GCM seal failed");
  Bytes result = nonce;
  result.insert(result.end(), out.begin(), out.end());
  result.insert(result.end(), tag.begin(), tag.end());
  return result;
}

std::optional<Bytes> aes_gcm_open(const Bytes& key, const Bytes& sealed) {
  if (sealed.size() < kNonceLen + kTagLen) return std::nullopt;
  const uint8_t* nonce = sealed.data();
  const uint8_t* ct = sealed.data() + kNonceLen;
  size_t ct_len = sealed.size() - kNonceLen - kTagLen;
  Bytes tag(sealed.end() - long(kTagLen), sealed.end());
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw std::runtime_error("EVP ctx alloc");
  Bytes out(ct_len);
  int len = 0;
  bool ok = EVP_DecryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(),
                               nonce) == 1 &&
            EVP_DecryptUpdate(ctx, out.data(), &len, ct, int(ct_len)) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, int(kTagLen),
                                tag.data()) == 1 &&
            EVP_DecryptFinal_ex(ctx, out.data() + len, &len) == 1;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) return std::nullopt;
  return out;
}

Bytes mpz_min_bytes(const mpz_class& v) {
  size_t width = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  if (v == 0) width = 1;
  return mpz_to_bytes(v, width);
}

std::string format_id(const char* prefix, size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%03zu", prefix, i);
  return buf;
}

}  // namespace

Bytes make_pid(const Bytes& k0, const Bytes& real_id, const mpz_class& x,
               size_t index, size_t q_width) {
  Serializer plain;
  plain.field(real_id);
  plain.field_mpz(x, q_width);
  Bytes nonce_input = to_bytes("pid-nonce");
  nonce_input.insert(nonce_input.end(), real_id.begin(), real_id.end());
  append_u64_be(nonce_input, uint64_t(index));
  auto digest = sha256(nonce_input);
  Bytes nonce(digest.begin(), digest.begin() + kNonceLen);
  return aes_gcm_seal(k0, nonce, plain.bytes());
}

std::optional<std::pair<Bytes, mpz_class>> open_pid(const Bytes& k0,
                                                    const Bytes& pid) {
  auto plain = aes_gcm_open(k0, pid);
  if (!plain) return std::nullopt;
  // two length-prefixed fields: real id, secret scalar
  std::span<const uint8_t> in(*plain);
  if (in.size() < 4) return std::nullopt;
  uint32_t id_len = (uint32_t(in[0]) << 24) | (uint32_t(in[1]) << 16) |
                    (uint32_t(in[2]) << 8) | in[3];
  if (in.size() < 4 + id_len + 4) return std::nullopt;
  Bytes real_id(in.begin() + 4, in.begin() + 4 + id_len);
  auto rest = in.subspan(4 + id_len);
  uint32_t x_len = (uint32_t(rest[0]) << 24) | (uint32_t(rest[1]) << 16) |
                   (uint32_t(rest[2]) << 8) | rest[3];
  if (rest.size() != 4 + x_len) return std::nullopt;
  return std::make_pair(real_id, mpz_from_bytes(rest.subspan(4)));
}

System ta_init(const InitConfig& cfg, Rng& rng) {
  System sys;
  sys.group = PairingGroup::generate(cfg.kappa);
  auto kp = paillier::keygen(cfg.kappa1, rng);
  if (!cfg.codec.sum_fits(cfg.num_processors, kp.pk.n))
    throw std::invalid_argument("ta_init: fixed-point sum bound violated");

  sys.ta.k0 = rng.bytes(32);
  sys.ta.pk = kp.pk;
  sys.ta.sk = kp.sk;
  sys.ta.chi.chi = rng.mpz_coprime(kp.pk.n);
  sys.ta.engine = cfg.engine;
  sys.ta.codec = cfg.codec;

  size_t q_width = (mpz_sizeinbase(sys.group->order().get_mpz_t(), 2) + 7) / 8;
  auto make_identity = [&](const std::string& id) {
    Identity ident;
    ident.real_id = to_bytes(id);
    for (size_t j = 0; j < cfg.pseudonyms_per_entity; ++j) {
      Pseudonym p;
      p.keys = gen_sig_keypair(*sys.group, rng);
      p.pid = make_pid(sys.ta.k0, ident.real_id, p.keys.secret, j, q_width);
      ident.pseudonyms.push_back(std::move(p));
    }
    return ident;
  };

  for (size_t i = 0; i < cfg.num_customers; ++i) {
    CustomerState c;
    c.identity = make_identity(format_id("cust", i));
    sys.customers.push_back(std::move(c));
  }
  for (size_t i = 0; i < cfg.num_processors; ++i) {
    ProcessorState p;
    p.identity = make_identity(format_id("proc", i));
    mpz_class t0_enc(cfg.codec.encode_trust(cfg.engine.t0));
    p.token = issue(kp.pk, sys.ta.chi, t0_enc, sys.epoch, rng);
    LedgerEntry entry;
    entry.predicted = cfg.engine.t0;
    sys.ta.ledger[p.identity.real_id] = entry;
    sys.processors.push_back(std::move(p));
  }

  sys.rsu.pk = kp.pk;
  sys.rsu.chi = sys.ta.chi;
  sys.rsu.keys = gen_sig_keypair(*sys.group, rng);

  sys.sp.pk = kp.pk;
  sys.sp.sk = kp.sk;
  sys.sp.rsu_pub = sys.rsu.keys.pub;
  sys.sp.codec = cfg.codec;
  sys.sp.engine = cfg.engine;

  sys.delivered_params = {
      {"ta", {"k0", "lambda", "mu", "chi", "n", "g", "pairing", "ledger"}},
      {"sp", {"n", "g", "lambda", "mu", "Y_r", "pairing"}},
      {"rsu", {"n", "g", "chi", "x_r", "Y_r", "pairing"}},
      {"customer", {"PID", "x", "Y", "t_c", "n", "pairing", "H"}},
      {"processor", {"PID", "x", "Y", "t_c", "C", "c_sig", "n", "pairing", "H"}},
  };
  return sys;
}

// ---------------------------------------------------------------------------
// Serializations

Bytes processor_report_message(const PairingGroup& g,
                               const paillier::PublicKey& pk,
                               const ProcessorReport& r) {
  Serializer fr;
  fr.field(r.fr.customer_pid);
  fr.field(r.fr.task_id);
  fr.field_u64(uint64_t(r.fr.feedback));
  Serializer s;
  s.field(r.pid);
  s.field(g.encode(r.pub));
  s.field(fr.bytes());
  s.field(serialize_token(pk, r.tr));
  s.field(g.encode(r.proof_jk));
  return s.bytes();
}

Bytes customer_report_message(const PairingGroup& g, const CustomerReport& r) {
  Serializer s;
  s.field(r.pid);
  s.field(r.task_id);
  for (const auto& [pid, proof] : r.proofs) {
    s.field(pid);
    s.field(g.encode(proof));
  }
  return s.bytes();
}

Bytes aggregated_report_message(const PairingGroup& g,
                                const paillier::PublicKey& pk,
                                const AggregatedReport& r) {
  Serializer s;
  s.field(r.customer_pid);
  s.field(r.task_id);
  s.field(paillier::serialize(pk, r.c1));
  s.field(paillier::serialize(pk, r.c2));
  for (const auto& [pid, f] : r.entries) {
    s.field(pid);
    s.field_u64(uint64_t(f));
  }
  return s.bytes();
}

// ---------------------------------------------------------------------------
// Handshake and report generation

CustomerTaskContext customer_start_task(CustomerState& customer,
                                        size_t customer_index,
                                        const Bytes& task_id, unsigned eph_bits,
                                        Rng& rng, bool rotate_pseudonym) {
  CustomerTaskContext ctx;
  ctx.customer_index = customer_index;
  ctx.pseudonym_index = customer.next_pseudonym % customer.identity.pseudonyms.size();
  if (rotate_pseudonym) ++customer.next_pseudonym;
  ctx.task_id = task_id;
  ctx.ephemeral = paillier::keygen(eph_bits, rng);
  ctx.alpha_k = rng.mpz_coprime(ctx.ephemeral.pk.n);
  return ctx;
}

HandshakeProof do_handshake(const PairingGroup& g, CustomerTaskContext& ctx,
                            const CustomerState& customer,
                            ProcessorState& processor, size_t pseudonym_index,
                            Rng& rng) {
  const auto& cust_keys =
      customer.identity.pseudonyms[ctx.pseudonym_index].keys;
  const auto& proc_pseudonym =
      processor.identity.pseudonyms[pseudonym_index %
                                    processor.identity.pseudonyms.size()];

  mpz_class alpha_j = rng.mpz_coprime(ctx.ephemeral.pk.n);
  auto c_alpha = paillier::encrypt(ctx.ephemeral.pk, alpha_j, rng);
  mpz_class recovered =
      paillier::decrypt(ctx.ephemeral.sk, ctx.ephemeral.pk, c_alpha);
  if (recovered != alpha_j)
    throw std::runtime_error("handshake: alpha transport mismatch");

  Bytes sum_bytes = mpz_min_bytes(ctx.alpha_k + recovered);
  auto h = g.hash_to_group(sum_bytes);
  HandshakeProof proof;
  proof.alpha_k = ctx.alpha_k;
  proof.alpha_j = alpha_j;
  proof.proof_kj = g.mul(cust_keys.secret, h);
  proof.proof_jk = g.mul(proc_pseudonym.keys.secret, h);
  ctx.proofs.emplace_back(proc_pseudonym.pid, proof.proof_kj);
  return proof;
}

CustomerReport customer_make_report(const PairingGroup& g,
                                    const CustomerState& customer,
                                    const CustomerTaskContext& ctx) {
  const auto& pseudonym = customer.identity.pseudonyms[ctx.pseudonym_index];
  CustomerReport r;
  r.pid = pseudonym.pid;
  r.task_id = ctx.task_id;
  r.pub = pseudonym.keys.pub;
  r.proofs = ctx.proofs;
  r.sig = sign(g, pseudonym.keys.secret, customer_report_message(g, r));
  return r;
}

ProcessorReport processor_make_report(const PairingGroup& g,
                                      const paillier::PublicKey& pk,
                                      ProcessorState& processor,
                                      const Bytes& customer_pid,
                                      const Bytes& task_id, long feedback,
                                      const PairingGroup::Point& proof_jk,
                                      Rng& rng, bool rotate_pseudonym,
                                      bool perturb_token,
                                      const TrustToken* token_override) {
  size_t count = processor.identity.pseudonyms.size();
  size_t idx = processor.next_pseudonym % count;
  if (rotate_pseudonym) {
    ++processor.next_pseudonym;
    if (processor.next_pseudonym >= count) processor.pseudonym_wrapped = true;
  }
  const auto& pseudonym = processor.identity.pseudonyms[idx];

  ProcessorReport r;
  r.pid = pseudonym.pid;
  r.pub = pseudonym.keys.pub;
  r.fr = FeedbackReport{customer_pid, task_id, feedback};
  if (token_override) {
    r.tr = *token_override;
  } else {
    r.tr = perturb_token ? perturb(pk, processor.token, rng) : processor.token;
  }
  r.proof_jk = proof_jk;
  r.sig = sign(g, pseudonym.keys.secret, processor_report_message(g, pk, r));
  return r;
}

// ---------------------------------------------------------------------------
// RSU aggregation

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::signature: return "signature";
    case RejectReason::handshake: return "handshake";
    case RejectReason::fake_trust: return "fake-trust";
  }
  return "?";
}

RsuResult rsu_process(const PairingGroup& g, const RsuState& rsu,
                      const CustomerReport& customer_report,
                      const std::vector<ProcessorReport>& reports,
                      uint64_t epoch) {
  if (reports.empty())
    throw std::invalid_argument("rsu_process: no reports submitted");
  if (!verify(g, customer_report.pub,
              customer_report_message(g, customer_report),
              customer_report.sig))
    throw std::runtime_error("rsu_process: invalid customer report signature");

  RsuResult result;
  std::vector<size_t> accepted(reports.size());
  for (size_t i = 0; i < reports.size(); ++i) accepted[i] = i;

  // Batch signature check, individual fallback on failure.
  {
    std::vector<BatchEntry> entries;
    for (size_t i : accepted)
      entries.push_back(BatchEntry{
          reports[i].pub, processor_report_message(g, rsu.pk, reports[i]),
          reports[i].sig});
    auto batch = batch_verify(g, entries);
    result.ops.push_back(
        {"report_batch", batch.pairing_count, entries.size()});
    if (!batch.ok) {
      std::vector<size_t> survivors;
      for (size_t i : accepted) {
        if (verify(g, reports[i].pub,
                   processor_report_message(g, rsu.pk, reports[i]),
                   reports[i].sig)) {
          survivors.push_back(i);
        } else {
          result.rejections.push_back({reports[i].pid, RejectReason::signature});
        }
      }
      result.ops.push_back(
          {"report_individual", 2 * uint64_t(accepted.size()),
           accepted.size()});
      accepted = std::move(survivors);
    }
  }

  // Handshake proofs, matched to the customer's list by pseudonym.
  {
    std::map<Bytes, PairingGroup::Point> by_pid(
        customer_report.proofs.begin(), customer_report.proofs.end());
    std::vector<size_t> matched;
    std::vector<HandshakePair> pairs;
    for (size_t i : accepted) {
      auto it = by_pid.find(reports[i].pid);
      if (it == by_pid.end()) {
        result.rejections.push_back({reports[i].pid, RejectReason::handshake});
        continue;
      }
      matched.push_back(i);
      pairs.push_back(
          HandshakePair{reports[i].pub, reports[i].proof_jk, it->second});
    }
    accepted = std::move(matched);
    if (!pairs.empty()) {
      bool ok = batch_verify_handshake(g, customer_report.pub, pairs);
      result.ops.push_back(
          {"handshake_batch", uint64_t(pairs.size()) + 1, pairs.size()});
      if (!ok) {
        std::vector<size_t> survivors;
        for (size_t k = 0; k < accepted.size(); ++k) {
          size_t i = accepted[k];
          if (g.pair(customer_report.pub, pairs[k].proof_jk) ==
              g.pair(reports[i].pub, pairs[k].proof_kj)) {
            survivors.push_back(i);
          } else {
            result.rejections.push_back(
                {reports[i].pid, RejectReason::handshake});
          }
        }
        result.ops.push_back(
            {"handshake_individual", 2 * uint64_t(pairs.size()), pairs.size()});
        accepted = std::move(survivors);
      }
    }
  }

  // Freshness (product form). Stale stamps go first, then the batch
  // identity with individual fallback.
  {
    std::vector<size_t> stamped;
    for (size_t i : accepted) {
      if (reports[i].tr.epoch != epoch) {
        result.rejections.push_back({reports[i].pid, RejectReason::fake_trust});
      } else {
        stamped.push_back(i);
      }
    }
    accepted = std::move(stamped);
    if (!accepted.empty()) {
      std::vector<TrustToken> tokens;
      for (size_t i : accepted) tokens.push_back(reports[i].tr);
      bool ok = batch_verify_fresh(rsu.pk, rsu.chi, tokens, epoch);
      result.ops.push_back({"freshness_batch", 0, tokens.size()});
      if (!ok) {
        std::vector<size_t> survivors;
        for (size_t i : accepted) {
          if (verify_fresh(rsu.pk, rsu.chi, reports[i].tr, epoch)) {
            survivors.push_back(i);
          } else {
            result.rejections.push_back(
                {reports[i].pid, RejectReason::fake_trust});
          }
        }
        result.ops.push_back({"freshness_individual", 0, accepted.size()});
        accepted = std::move(survivors);
      }
    }
  }

  if (accepted.empty())
    throw std::runtime_error("rsu_process: all reports rejected");

  AggregatedReport agg;
  agg.customer_pid = customer_report.pid;
  agg.task_id = customer_report.task_id;
  agg.rsu_pub = rsu.keys.pub;
  paillier::Ciphertext c1{1}, c2{1};
  for (size_t i : accepted) {
    const auto& token = reports[i].tr.c_trust;
    c1 = paillier::add(rsu.pk, c1,
                       paillier::scalar_mul(rsu.pk, token,
                                            mpz_class(reports[i].fr.feedback)));
    c2 = paillier::add(rsu.pk, c2, token);
    agg.entries.emplace_back(reports[i].pid, reports[i].fr.feedback);
  }
  agg.c1 = c1;
  agg.c2 = c2;
  agg.sig = sign(g, rsu.keys.secret,
                 aggregated_report_message(g, rsu.pk, agg));
  result.report = std::move(agg);
  return result;
}

// ---------------------------------------------------------------------------
// SP and TA

SpEvaluation sp_score(const PairingGroup& g, SpState& sp,
                      const AggregatedReport& report) {
  if (!verify(g, sp.rsu_pub, aggregated_report_message(g, sp.pk, report),
              report.sig))
    throw std::runtime_error("sp_score: invalid RSU signature");
  mpz_class d1 = paillier::decrypt(sp.sk, sp.pk, report.c1);
  mpz_class d2 = paillier::decrypt(sp.sk, sp.pk, report.c2);
  if (d2 == 0) throw std::runtime_error("sp_score: degenerate aggregate");

  SpEvaluation eval;
  mpq_class ratio(d1, d2 * sp.codec.feedback_scale);
  ratio.canonicalize();
  eval.initial_rs = ratio.get_d();

  std::vector<double> feedbacks;
  feedbacks.reserve(report.entries.size());
  for (const auto& [pid, f] : report.entries)
    feedbacks.push_back(sp.codec.decode_feedback(f));
  eval.discovery = run_truth_discovery(eval.initial_rs, feedbacks, sp.engine);

  for (size_t j = 0; j < report.entries.size(); ++j) {
    double t = trust_quality(feedbacks[j], eval.discovery.rs,
                             eval.discovery.iterations, sp.engine);
    eval.trust_updates.emplace_back(report.entries[j].first, t);
  }

  auto it = std::find_if(sp.reputations.begin(), sp.reputations.end(),
                         [&](const auto& e) {
                           return e.first == report.customer_pid;
                         });
  if (it == sp.reputations.end())
    sp.reputations.emplace_back(report.customer_pid, eval.discovery.rs);
  else
    it->second = eval.discovery.rs;
  return eval;
}

std::vector<LedgerUpdate> ta_update_ledger(
    TaState& ta, const std::vector<std::pair<Bytes, double>>& trust_updates,
    uint64_t next_epoch, Rng& rng) {
  // merge per real identity; a processor can appear under several pseudonyms
  std::map<Bytes, std::pair<double, size_t>> merged;
  for (const auto& [pid, trust] : trust_updates) {
    auto opened = open_pid(ta.k0, pid);
    if (!opened) {
      ta.dropped_pids.push_back(hex(pid));
      continue;
    }
    auto& slot = merged[opened->first];
    slot.first += trust;
    slot.second += 1;
  }

  std::vector<LedgerUpdate> out;
  for (const auto& [real_id, acc] : merged) {
    auto it = ta.ledger.find(real_id);
    if (it == ta.ledger.end()) {
      ta.dropped_pids.push_back("unregistered:" + std::string(real_id.begin(),
                                                              real_id.end()));
      continue;
    }
    LedgerEntry& entry = it->second;
    double current = acc.first / double(acc.second);
    entry.history.push_back(current);
    double past = entry.history.size() >= 2
                      ? entry.history[entry.history.size() - 2]
                      : current;
    double predicted = ewma_predict(past, current, ta.engine);
    bool fired_before = entry.breaker;
    auto [final_trust, flag] =
        circuit_breaker(past, current, predicted, entry.breaker, ta.engine);
    entry.breaker = flag;
    if (!ta.engine.breaker_permanent && fired_before && flag && past - current <= ta.engine.t_threshold)
      entry.breaker = false;  // one-shot decay when persistence is disabled
    entry.predicted = final_trust;

    LedgerUpdate upd;
    upd.real_id = real_id;
    upd.trust = final_trust;
    upd.breaker = entry.breaker;
    upd.breaker_fired_now = flag && !fired_before;
    mpz_class enc(ta.codec.encode_trust(final_trust));
    upd.token = issue(ta.pk, ta.chi, enc, next_epoch, rng);
    out.push_back(std::move(upd));
  }
  return out;
}

std::vector<LedgerUpdate> ta_reissue_tokens(TaState& ta,
                                            const std::vector<Bytes>& skip,
                                            uint64_t next_epoch, Rng& rng) {
  std::vector<LedgerUpdate> out;
  for (auto& [real_id, entry] : ta.ledger) {
    if (std::find(skip.begin(), skip.end(), real_id) != skip.end()) continue;
    LedgerUpdate upd;
    upd.real_id = real_id;
    upd.trust = entry.predicted;
    upd.breaker = entry.breaker;
    mpz_class enc(ta.codec.encode_trust(entry.predicted));
    upd.token = issue(ta.pk, ta.chi, enc, next_epoch, rng);
    out.push_back(std::move(upd));
  }
  return out;
}

std::vector<std::pair<Bytes, double>> query_customers(const SpState& sp) {
  auto out = sp.reputations;
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace tpcs
