#include "tpcs/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tpcs/hash.hpp"

namespace tpcs {

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

Bytes task_label(int round, size_t customer) {
  std::string s = "t" + std::to_string(round) + "-" + std::to_string(customer);
  return to_bytes(s);
}

struct AttackPlan {
  bool malicious = false;
  AttackKind kind = AttackKind::none;
};

std::vector<AttackPlan> build_plans(const ScenarioConfig& cfg) {
  std::vector<AttackPlan> plans(cfg.sum);
  size_t n_mal = size_t(cfg.rho * double(cfg.sum));
  for (size_t j = 0; j < n_mal; ++j) {
    plans[j].malicious = true;
    plans[j].kind = cfg.attack_mix[j % cfg.attack_mix.size()];
  }
  return plans;
}

// An unregistered outsider: own keys, self-signed report, fabricated token
// and proof. Fails the handshake check (the customer never issued a
// proof_kj for it) and would fail freshness as well.
ProcessorReport forge_external_report(const PairingGroup& g,
                                      const paillier::PublicKey& pk,
                                      const Bytes& customer_pid,
                                      const Bytes& task_id, long feedback,
                                      uint64_t epoch, Rng& rng) {
  SigKeypair keys = gen_sig_keypair(g, rng);
  ProcessorReport r;
  r.pid = rng.bytes(48);
  r.pub = keys.pub;
  r.fr = FeedbackReport{customer_pid, task_id, feedback};
  r.tr = TrustToken{paillier::encrypt(pk, 9000, rng),
                    paillier::encrypt(pk, 9000, rng), epoch};
  r.proof_jk = g.mul(g.random_scalar(rng), g.generator());
  r.sig = sign(g, keys.secret, processor_report_message(g, pk, r));
  return r;
}

}  // namespace

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "none") return AttackKind::none;
  if (s == "badmouth" || s == "badmouth_internal")
    return AttackKind::badmouth_internal;
  if (s == "badmouth_external") return AttackKind::badmouth_external;
  if (s == "onoff" || s == "on-off") return AttackKind::onoff;
  if (s == "fake_trust_collude" || s == "collude")
    return AttackKind::fake_trust_collude;
  if (s == "fake_trust_replay" || s == "replay")
    return AttackKind::fake_trust_replay;
  throw std::invalid_argument("unknown attack kind: " + s);
}

const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::none: return "none";
    case AttackKind::badmouth_internal: return "badmouth_internal";
    case AttackKind::badmouth_external: return "badmouth_external";
    case AttackKind::onoff: return "onoff";
    case AttackKind::fake_trust_collude: return "fake_trust_collude";
    case AttackKind::fake_trust_replay: return "fake_trust_replay";
  }
  return "?";
}

void ScenarioConfig::validate() const {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("config: rho outside [0,1]");
  if (sum < 1) throw std::invalid_argument("config: sum must be >= 1");
  if (rounds < 1) throw std::invalid_argument("config: rounds must be >= 1");
  if (m_h < 1) throw std::invalid_argument("config: m_h must be >= 1");
  if (pseudonyms < 1)
    throw std::invalid_argument("config: pseudonyms must be >= 1");
  if (attack_mix.empty())
    throw std::invalid_argument("config: empty attack mix");
  if (honest_quality < 0.0 || honest_quality > 1.0 || badmouth_feedback < 0.0 ||
      badmouth_feedback > 1.0)
    throw std::invalid_argument("config: feedback values outside [0,1]");
  if (engine.c0 <= 0 || engine.c0 >= 1 || engine.c1 <= 0 || engine.c1 > 1 ||
      engine.alpha <= 0 || engine.alpha >= 1)
    throw std::invalid_argument("config: engine factors outside (0,1)");
  if (engine.max_iterations < 1)
    throw std::invalid_argument("config: v_max must be >= 1");
  // Worst-case aggregate must fit the smallest modulus this kappa1 can give.
  mpz_class n_min = mpz_class(1) << (2 * kappa1 - 2);
  if (!codec.sum_fits(sum, n_min))
    throw std::invalid_argument("config: fixed-point sum bound violated");
}

ScenarioConfig parse_config_text(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "kappa") cfg.kappa = unsigned(std::stoul(val));
    else if (key == "kappa1") cfg.kappa1 = unsigned(std::stoul(val));
    else if (key == "m_h") cfg.m_h = std::stoul(val);
    else if (key == "sum") cfg.sum = std::stoul(val);
    else if (key == "rho") cfg.rho = std::stod(val);
    else if (key == "T0") cfg.engine.t0 = std::stod(val);
    else if (key == "c0") cfg.engine.c0 = std::stod(val);
    else if (key == "c1") cfg.engine.c1 = std::stod(val);
    else if (key == "alpha") cfg.engine.alpha = std::stod(val);
    else if (key == "v_max") cfg.engine.max_iterations = std::stoi(val);
    else if (key == "U_threshold") cfg.engine.u_threshold = std::stod(val);
    else if (key == "F_threshold") cfg.engine.f_threshold = std::stod(val);
    else if (key == "T_threshold") cfg.engine.t_threshold = std::stod(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "rounds") cfg.rounds = std::stoi(val);
    else if (key == "pseudonyms") cfg.pseudonyms = std::stoul(val);
    else if (key == "eph_bits") cfg.eph_bits = unsigned(std::stoul(val));
    else if (key == "honest_quality") cfg.honest_quality = std::stod(val);
    else if (key == "noise_sigma") cfg.noise_sigma = std::stod(val);
    else if (key == "badmouth_feedback") cfg.badmouth_feedback = std::stod(val);
    else if (key == "onoff_good_rounds") cfg.onoff_good_rounds = std::stoi(val);
    else if (key == "onoff_attack_feedback")
      cfg.onoff_attack_feedback = std::stod(val);
    else if (key == "trust_scale") cfg.codec.trust_scale = std::stol(val);
    else if (key == "feedback_scale") cfg.codec.feedback_scale = std::stol(val);
    else if (key == "perturbation")
      cfg.perturbation_enabled = (val == "1" || val == "true" || val == "on");
    else if (key == "pid_rotation")
      cfg.pid_rotation_enabled = (val == "1" || val == "true" || val == "on");
    else if (key == "attack") {
      cfg.attack_mix.clear();
      std::istringstream mix(val);
      std::string item;
      while (std::getline(mix, item, ','))
        cfg.attack_mix.push_back(attack_kind_from_string(item));
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  InitConfig init;
  init.kappa = cfg.kappa;
  init.kappa1 = cfg.kappa1;
  init.num_customers = cfg.m_h;
  init.num_processors = cfg.sum;
  init.pseudonyms_per_entity = cfg.pseudonyms;
  init.codec = cfg.codec;
  init.engine = cfg.engine;
  System sys = ta_init(init, rng);
  const PairingGroup& g = *sys.group;
  auto plans = build_plans(cfg);

  ScenarioResult result;
  result.cfg = cfg;
  result.malicious_count = size_t(cfg.rho * double(cfg.sum));

  // plaintext shadow of every processor's current encoded trust
  std::map<Bytes, long> shadow_trust;
  for (const auto& p : sys.processors)
    shadow_trust[p.identity.real_id] =
        cfg.codec.encode_trust(cfg.engine.t0);
  // pid -> real id, for shadow accounting of accepted entries
  std::map<Bytes, Bytes> pid_owner;
  for (const auto& p : sys.processors)
    for (const auto& ps : p.identity.pseudonyms) pid_owner[ps.pid] = p.identity.real_id;
  for (const auto& c : sys.customers)
    for (const auto& ps : c.identity.pseudonyms) pid_owner[ps.pid] = c.identity.real_id;

  for (int round = 1; round <= cfg.rounds; ++round) {
    RoundMetrics rm;
    rm.round = round;
    uint64_t epoch = sys.epoch;
    std::vector<std::pair<Bytes, double>> round_trust_updates;

    for (size_t k = 0; k < cfg.m_h; ++k) {
      Bytes task_id = task_label(round, k);
      auto ctx = customer_start_task(sys.customers[k], k, task_id,
                                     cfg.eph_bits, rng,
                                     cfg.pid_rotation_enabled);
      std::vector<ProcessorReport> reports;
      for (size_t j = 0; j < cfg.sum; ++j) {
        const AttackPlan& plan = plans[j];
        const auto& cust_pid =
            sys.customers[k].identity.pseudonyms[ctx.pseudonym_index].pid;
        if (plan.kind == AttackKind::badmouth_external) {
          reports.push_back(forge_external_report(
              g, sys.rsu.pk, cust_pid, task_id,
              cfg.codec.encode_feedback(cfg.badmouth_feedback), epoch, rng));
          continue;
        }
        ProcessorState& proc = sys.processors[j];
        auto hs = do_handshake(g, ctx, sys.customers[k], proc,
                               proc.next_pseudonym, rng);
        double f;
        switch (plan.kind) {
          case AttackKind::badmouth_internal:
            f = cfg.badmouth_feedback;
            break;
          case AttackKind::onoff:
            f = (round == cfg.onoff_good_rounds + 1)
                    ? cfg.onoff_attack_feedback
                    : clip01(rng.normal(cfg.honest_quality, cfg.noise_sigma));
            break;
          default:
            f = clip01(rng.normal(cfg.honest_quality, cfg.noise_sigma));
            break;
        }
        long f_enc = cfg.codec.encode_feedback(f);
        TrustToken forged;
        const TrustToken* override_token = nullptr;
        if (plan.kind == AttackKind::fake_trust_collude) {
          const TrustToken& other =
              sys.processors[(j + 1) % cfg.sum].token;
          forged = TrustToken{
              paillier::Ciphertext{(proc.token.c_trust.c * other.c_trust.c) %
                                   sys.rsu.pk.n2},
              paillier::Ciphertext{(proc.token.c_sig.c * other.c_sig.c) %
                                   sys.rsu.pk.n2},
              epoch};
          override_token = &forged;
        } else if (plan.kind == AttackKind::fake_trust_replay &&
                   proc.previous_token) {
          forged = *proc.previous_token;
          forged.epoch = epoch;  // rewritten stamp; algebra still fails
          override_token = &forged;
        }
        reports.push_back(processor_make_report(
            g, sys.rsu.pk, proc, cust_pid, task_id, f_enc, hs.proof_jk, rng,
            cfg.pid_rotation_enabled, cfg.perturbation_enabled,
            override_token));
      }
      auto customer_report =
          customer_make_report(g, sys.customers[k], ctx);

      auto rsu_result =
          rsu_process(g, sys.rsu, customer_report, reports, epoch);
      rm.submitted += reports.size();
      rm.accepted += rsu_result.report.entries.size();
      for (const auto& rej : rsu_result.rejections)
        rm.rejections.push_back(
            {hex(rej.pid), reject_reason_name(rej.reason)});
      for (auto& op : rsu_result.ops) rm.ops.push_back(op);

      // shadow check against the decrypted aggregate
      mpz_class want1 = 0, want2 = 0;
      for (const auto& [pid, f_enc] : rsu_result.report.entries) {
        long t_enc = shadow_trust.at(pid_owner.at(pid));
        want1 += mpz_class(t_enc) * f_enc;
        want2 += t_enc;
      }
      mpz_class got1 =
          paillier::decrypt(sys.sp.sk, sys.sp.pk, rsu_result.report.c1);
      mpz_class got2 =
          paillier::decrypt(sys.sp.sk, sys.sp.pk, rsu_result.report.c2);
      if (got1 != want1 || got2 != want2) rm.shadow_match = false;

      auto eval = sp_score(g, sys.sp, rsu_result.report);
      rm.reputation.emplace_back(k, eval.discovery.rs_by_iteration);
      for (auto& upd : eval.trust_updates)
        round_trust_updates.push_back(upd);
    }

    uint64_t next_epoch = epoch + 1;
    auto updates =
        ta_update_ledger(sys.ta, round_trust_updates, next_epoch, rng);
    std::vector<Bytes> updated_ids;
    for (const auto& u : updates) updated_ids.push_back(u.real_id);
    auto reissues = ta_reissue_tokens(sys.ta, updated_ids, next_epoch, rng);
    for (auto* batch : {&updates, &reissues}) {
      for (auto& upd : *batch) {
        for (auto& proc : sys.processors) {
          if (proc.identity.real_id == upd.real_id) {
            proc.previous_token = proc.token;
            proc.token = upd.token;
            break;
          }
        }
        shadow_trust[upd.real_id] = cfg.codec.encode_trust(upd.trust);
        rm.trust.emplace_back(
            std::string(upd.real_id.begin(), upd.real_id.end()), upd.trust,
            upd.breaker);
        if (upd.breaker_fired_now)
          rm.breaker_fired.push_back(
              std::string(upd.real_id.begin(), upd.real_id.end()));
      }
    }
    std::sort(rm.trust.begin(), rm.trust.end());
    sys.epoch = next_epoch;
    result.rounds.push_back(std::move(rm));
  }

  // cohort means over the last round
  const auto& last = result.rounds.back();
  double h_sum = 0, m_sum = 0;
  size_t h_n = 0, m_n = 0;
  for (const auto& [id, trust, breaker] : last.trust) {
    if (id.rfind("proc-", 0) != 0) continue;
    size_t idx = std::stoul(id.substr(5));
    if (idx < plans.size() && plans[idx].malicious &&
        plans[idx].kind != AttackKind::badmouth_external) {
      m_sum += trust;
      ++m_n;
    } else if (idx < plans.size() && !plans[idx].malicious) {
      h_sum += trust;
      ++h_n;
    }
  }
  result.mean_honest_trust = h_n ? h_sum / double(h_n) : 0.0;
  result.mean_malicious_trust = m_n ? m_sum / double(m_n) : 0.0;
  return result;
}

LinkProbeResult link_attack_probe(const ScenarioConfig& cfg) {
  Rng rng(cfg.seed);
  InitConfig init;
  init.kappa = cfg.kappa;
  init.kappa1 = cfg.kappa1;
  init.num_customers = std::max<size_t>(cfg.m_h, 1);
  init.num_processors = cfg.sum;
  init.pseudonyms_per_entity = cfg.pseudonyms;
  init.codec = cfg.codec;
  init.engine = cfg.engine;
  System sys = ta_init(init, rng);
  const PairingGroup& g = *sys.group;
  uint64_t epoch = sys.epoch;

  // two tasks inside one token epoch; the adversary sees both transcripts
  auto run_task = [&](const Bytes& task_id) {
    auto ctx = customer_start_task(sys.customers[0], 0, task_id, cfg.eph_bits,
                                   rng, cfg.pid_rotation_enabled);
    std::vector<ProcessorReport> reports;
    for (size_t j = 0; j < cfg.sum; ++j) {
      ProcessorState& proc = sys.processors[j];
      auto hs =
          do_handshake(g, ctx, sys.customers[0], proc, proc.next_pseudonym, rng);
      double f = clip01(rng.normal(cfg.honest_quality, cfg.noise_sigma));
      reports.push_back(processor_make_report(
          g, sys.rsu.pk, proc, sys.customers[0]
                                   .identity.pseudonyms[ctx.pseudonym_index]
                                   .pid,
          task_id, cfg.codec.encode_feedback(f), hs.proof_jk, rng,
          cfg.pid_rotation_enabled, cfg.perturbation_enabled));
    }
    return reports;
  };
  auto round1 = run_task(to_bytes("link-a"));
  auto round2 = run_task(to_bytes("link-b"));

  std::vector<int> guess(cfg.sum, -1);
  std::vector<char> taken(cfg.sum, 0);
  for (size_t a = 0; a < cfg.sum; ++a) {
    Bytes tok_a = serialize_token(sys.rsu.pk, round1[a].tr);
    for (size_t b = 0; b < cfg.sum; ++b) {
      if (taken[b]) continue;
      if (round1[a].pid == round2[b].pid ||
          tok_a == serialize_token(sys.rsu.pk, round2[b].tr)) {
        guess[a] = int(b);
        taken[b] = 1;
        break;
      }
    }
  }
  // whatever could not be matched is paired off at random
  std::vector<size_t> free_b;
  for (size_t b = 0; b < cfg.sum; ++b)
    if (!taken[b]) free_b.push_back(b);
  for (size_t a = 0; a < cfg.sum; ++a) {
    if (guess[a] >= 0) continue;
    size_t pick = size_t(rng.u64() % free_b.size());
    guess[a] = int(free_b[pick]);
    free_b.erase(free_b.begin() + long(pick));
  }
  size_t correct = 0;
  for (size_t a = 0; a < cfg.sum; ++a)
    if (size_t(guess[a]) == a) ++correct;  // task order is processor order
  (void)epoch;
  return LinkProbeResult{double(correct) / double(cfg.sum), cfg.sum};
}

void emit_results(const ScenarioResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

  {
    std::ofstream f(path("reputation.csv"));
    f << "round,customer,iteration,RS\n";
    for (const auto& rm : result.rounds)
      for (const auto& [customer, traj] : rm.reputation)
        for (size_t it = 0; it < traj.size(); ++it)
          f << rm.round << ',' << customer << ',' << it << ','
            << fmt_double(traj[it]) << '\n';
  }
  {
    std::ofstream f(path("trust.csv"));
    f << "round,processor-real-id,trust,breaker_flag\n";
    for (const auto& rm : result.rounds)
      for (const auto& [id, trust, breaker] : rm.trust)
        f << rm.round << ',' << id << ',' << fmt_double(trust) << ','
          << (breaker ? 1 : 0) << '\n';
  }
  {
    std::ofstream f(path("rejections.csv"));
    f << "round,pid,reason\n";
    for (const auto& rm : result.rounds)
      for (const auto& rej : rm.rejections)
        f << rm.round << ',' << rej.pid_hex << ',' << rej.reason << '\n';
  }
  {
    std::ofstream f(path("ops.csv"));
    f << "round,check_type,pairing_count,batch_size\n";
    for (const auto& rm : result.rounds)
      for (const auto& op : rm.ops)
        f << rm.round << ',' << op.check_type << ',' << op.pairing_count << ','
          << op.batch_size << '\n';
  }
  {
    nlohmann::json j;
    j["config"] = {
        {"kappa", result.cfg.kappa},       {"kappa1", result.cfg.kappa1},
        {"m_h", result.cfg.m_h},           {"sum", result.cfg.sum},
        {"rho", result.cfg.rho},           {"rounds", result.cfg.rounds},
        {"seed", result.cfg.seed},
    };
    std::vector<std::string> mix;
    for (auto k : result.cfg.attack_mix) mix.push_back(attack_kind_name(k));
    j["config"]["attack_mix"] = mix;
    j["malicious_count"] = result.malicious_count;
    j["mean_honest_trust"] = result.mean_honest_trust;
    j["mean_malicious_trust"] = result.mean_malicious_trust;
    size_t rejected = 0, submitted = 0, accepted = 0;
    std::map<std::string, size_t> reasons;
    for (const auto& rm : result.rounds) {
      submitted += rm.submitted;
      accepted += rm.accepted;
      rejected += rm.rejections.size();
      for (const auto& rej : rm.rejections) ++reasons[rej.reason];
    }
    j["submitted"] = submitted;
    j["accepted"] = accepted;
    j["rejected"] = rejected;
    j["rejection_reasons"] = reasons;
    if (!result.rounds.empty()) {
      nlohmann::json reps = nlohmann::json::object();
      for (const auto& [customer, traj] : result.rounds.back().reputation)
        reps[std::to_string(customer)] = traj.back();
      j["final_reputation"] = reps;
    }
    std::ofstream f(path("summary.json"));
    f << j.dump(2) << '\n';
  }
}

int run_attack_suite(const ScenarioConfig& base, const std::string& out_dir) {
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
  };

  {  // external badmouth: every forged report bounced at the RSU
    ScenarioConfig cfg = base;
    cfg.attack_mix = {AttackKind::badmouth_external};
    cfg.rounds = 2;
    cfg.m_h = 1;
    auto res = run_scenario(cfg);
    emit_results(res, out_dir + "/badmouth_external");
    size_t expect = res.malicious_count * size_t(cfg.rounds) * cfg.m_h;
    size_t got = 0;
    for (const auto& rm : res.rounds) got += rm.rejections.size();
    check(got == expect, "external badmouth reports all rejected");
  }
  {  // internal badmouth: accepted but isolated by truth discovery
    ScenarioConfig cfg = base;
    cfg.attack_mix = {AttackKind::badmouth_internal};
    cfg.rounds = 2;
    cfg.m_h = 1;
    auto res = run_scenario(cfg);
    emit_results(res, out_dir + "/badmouth_internal");
    bool none_rejected = true;
    for (const auto& rm : res.rounds) none_rejected &= rm.rejections.empty();
    check(none_rejected, "internal badmouth reports pass authentication");
    check(res.mean_honest_trust > res.mean_malicious_trust,
          "internal badmouth trust below honest trust");
  }
  {  // fake trust: collusion products and replays bounced by freshness
    for (auto kind :
         {AttackKind::fake_trust_collude, AttackKind::fake_trust_replay}) {
      ScenarioConfig cfg = base;
      cfg.attack_mix = {kind};
      cfg.rounds = 3;
      cfg.m_h = 1;
      auto res = run_scenario(cfg);
      emit_results(res, out_dir + "/" + attack_kind_name(kind));
      // replays only exist once a previous epoch exists
      size_t active_rounds = (kind == AttackKind::fake_trust_replay)
                                 ? size_t(cfg.rounds) - 1
                                 : size_t(cfg.rounds);
      size_t expect = res.malicious_count * active_rounds;
      size_t got = 0;
      bool reason_ok = true;
      for (const auto& rm : res.rounds)
        for (const auto& rej : rm.rejections) {
          ++got;
          reason_ok &= rej.reason == std::string("fake-trust");
        }
      check(got == expect && reason_ok,
            std::string(attack_kind_name(kind)) +
                " rejected with fake-trust reason");
    }
  }
  {  // on-off: breaker at round good+1, forgetting factor slows recovery.
    // Tight honest noise so the pre-attack trust plateau sits well above
    // attack-round quality and the drop clears T_threshold.
    ScenarioConfig cfg = base;
    cfg.attack_mix = {AttackKind::onoff};
    cfg.noise_sigma = 1e-4;
    cfg.rounds = cfg.onoff_good_rounds + 5;
    cfg.m_h = 1;
    auto res = run_scenario(cfg);
    emit_results(res, out_dir + "/onoff");
    ScenarioConfig ablation = cfg;
    ablation.engine.c1 = 1.0;  // forgetting disabled
    auto res_ab = run_scenario(ablation);
    int attack_round = cfg.onoff_good_rounds + 1;
    bool fired = false;
    for (const auto& id : res.rounds[attack_round - 1].breaker_fired)
      if (id == "proc-000") fired = true;
    check(fired, "circuit breaker fires on the attack round");
    auto trust_of = [](const RoundMetrics& rm, const std::string& id) {
      for (const auto& [rid, trust, breaker] : rm.trust)
        if (rid == id) return trust;
      return -1.0;
    };
    double with_factor =
        trust_of(res.rounds.back(), "proc-000");
    double without_factor = trust_of(res_ab.rounds.back(), "proc-000");
    check(without_factor - with_factor >= 0.05,
          "forgetting factor keeps recovered trust lower");
  }
  {  // link probe: chance under TPCS, certainty under either ablation
    ScenarioConfig cfg = base;
    cfg.attack_mix = {AttackKind::none};
    cfg.rho = 0.0;
    double acc_sum = 0.0;
    int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
      ScenarioConfig c = cfg;
      c.seed = base.seed + uint64_t(s);
      acc_sum += link_attack_probe(c).accuracy;
    }
    double mean_acc = acc_sum / seeds;
    check(mean_acc <= 1.0 / double(cfg.sum) + 0.05,
          "full pipeline linkage at chance level");
    ScenarioConfig no_perturb = cfg;
    no_perturb.perturbation_enabled = false;
    check(link_attack_probe(no_perturb).accuracy == 1.0,
          "disabling perturbation makes tokens linkable");
    ScenarioConfig no_rotation = cfg;
    no_rotation.pid_rotation_enabled = false;
    check(link_attack_probe(no_rotation).accuracy == 1.0,
          "disabling pseudonym rotation makes reports linkable");
  }
  return failures;
}

int run_selftest() {
  int failures = 0;
  auto check = [&](bool ok, const char* what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what);
    if (!ok) ++failures;
  };
  Rng rng(42);
  auto g = PairingGroup::generate(96);

  bool bilinear = true;
  Fp2 base = g->pair(g->generator(), g->generator());
  for (int i = 0; i < 20; ++i) {
    mpz_class a = g->random_scalar(rng), b = g->random_scalar(rng);
    Fp2 lhs = g->pair(g->mul(a, g->generator()), g->mul(b, g->generator()));
    bilinear &= lhs == g->gt_pow(base, a * b % g->order());
  }
  check(bilinear, "pairing bilinearity");

  auto kp = paillier::keygen(96, rng);
  bool roundtrip = true, homomorphic = true;
  for (int i = 0; i < 50; ++i) {
    mpz_class a = rng.mpz_below(kp.pk.n), b = rng.mpz_below(kp.pk.n);
    auto ca = paillier::encrypt(kp.pk, a, rng);
    auto cb = paillier::encrypt(kp.pk, b, rng);
    roundtrip &= paillier::decrypt(kp.sk, kp.pk, ca) == a;
    homomorphic &= paillier::decrypt(kp.sk, kp.pk,
                                     paillier::add(kp.pk, ca, cb)) ==
                   (a + b) % kp.pk.n;
  }
  check(roundtrip, "paillier roundtrip");
  check(homomorphic, "paillier additive homomorphism");

  EpochSecret chi{rng.mpz_coprime(kp.pk.n)};
  bool fresh = true, stale = true;
  for (int i = 0; i < 50; ++i) {
    auto tok = issue(kp.pk, chi, rng.mpz_below(10000), 7, rng);
    fresh &= verify_fresh(kp.pk, chi, perturb(kp.pk, tok, rng), 7);
    stale &= !verify_fresh(kp.pk, chi, tok, 8);
  }
  check(fresh, "trust token freshness accepts honest tokens");
  check(stale, "trust token freshness rejects other epochs");

  bool sigs = true;
  auto keys = gen_sig_keypair(*g, rng);
  for (int i = 0; i < 10; ++i) {
    Bytes msg = rng.bytes(40);
    auto sig = sign(*g, keys.secret, msg);
    sigs &= verify(*g, keys.pub, msg, sig);
    msg[0] ^= 1;
    sigs &= !verify(*g, keys.pub, msg, sig);
  }
  check(sigs, "signature roundtrip and tamper rejection");
  return failures;
}

}  // namespace tpcs
