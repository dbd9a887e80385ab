#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tpcs/sim_harness.hpp"

using namespace tpcs;

namespace {

ScenarioConfig small_cfg() {
  ScenarioConfig cfg;
  cfg.kappa = 64;
  cfg.kappa1 = 64;
  cfg.m_h = 1;
  cfg.sum = 5;
  cfg.rho = 0.2;
  cfg.rounds = 2;
  cfg.pseudonyms = 8;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("attack kind names roundtrip") {
  for (auto k : {AttackKind::none, AttackKind::badmouth_internal,
                 AttackKind::badmouth_external, AttackKind::onoff,
                 AttackKind::fake_trust_collude, AttackKind::fake_trust_replay})
    CHECK(attack_kind_from_string(attack_kind_name(k)) == k);
  CHECK_THROWS(attack_kind_from_string("meteor"));
}

TEST_CASE("config parsing") {
  auto cfg = parse_config_text(
      "# comment\n"
      "kappa = 64\n"
      "kappa1 = 64\n"
      "m_h = 3\n"
      "sum = 7\n"
      "rho = 0.25\n"
      "T0 = 0.02\n"
      "c0 = 0.1\n"
      "c1 = 0.85\n"
      "alpha = 0.3\n"
      "v_max = 10\n"
      "U_threshold = 0.5\n"
      "F_threshold = 0.2\n"
      "T_threshold = 0.5\n"
      "seed = 9\n"
      "rounds = 4\n"
      "attack = badmouth,onoff\n");
  CHECK(cfg.m_h == 3);
  CHECK(cfg.sum == 7);
  CHECK(cfg.rho == doctest::Approx(0.25));
  CHECK(cfg.engine.t0 == doctest::Approx(0.02));
  CHECK(cfg.seed == 9);
  CHECK(cfg.rounds == 4);
  REQUIRE(cfg.attack_mix.size() == 2);
  CHECK(cfg.attack_mix[0] == AttackKind::badmouth_internal);
  CHECK(cfg.attack_mix[1] == AttackKind::onoff);

  CHECK_THROWS(parse_config_text("rho = 1.5\n"));
  CHECK_THROWS(parse_config_text("volume = 11\n"));  // unknown key
  CHECK_THROWS(parse_config_text("rho 0.2\n"));      // missing '='
  // fixed-point bound: worst-case aggregate would not fit a 32-bit modulus
  CHECK_THROWS(parse_config_text("kappa1 = 16\nsum = 1000\n"));
}

TEST_CASE("benign scenario") {
  auto cfg = small_cfg();
  cfg.rho = 0.0;
  auto res = run_scenario(cfg);
  REQUIRE(res.rounds.size() == 2);
  for (const auto& rm : res.rounds) {
    CHECK(rm.rejections.empty());
    CHECK(rm.shadow_match);
    CHECK(rm.accepted == rm.submitted);
    // RS tracks the honest feedback mean
    for (const auto& [customer, traj] : rm.reputation)
      CHECK(std::fabs(traj.back() - cfg.honest_quality) < 0.05);
  }
  CHECK(res.malicious_count == 0);
}

TEST_CASE("conservation and ops accounting") {
  auto cfg = small_cfg();
  cfg.attack_mix = {AttackKind::badmouth_external};
  auto res = run_scenario(cfg);
  for (const auto& rm : res.rounds) {
    CHECK(rm.accepted + rm.rejections.size() == rm.submitted);
    CHECK(rm.shadow_match);
    for (const auto& op : rm.ops) {
      if (op.check_type == "report_batch" || op.check_type == "handshake_batch")
        CHECK(op.pairing_count == op.batch_size + 1);
      if (op.check_type == "report_individual")
        CHECK(op.pairing_count == 2 * op.batch_size);
    }
  }
}

TEST_CASE("fake trust attacks are rejected with the right reason") {
  for (auto kind :
       {AttackKind::fake_trust_collude, AttackKind::fake_trust_replay}) {
    auto cfg = small_cfg();
    cfg.rounds = 3;
    cfg.attack_mix = {kind};
    auto res = run_scenario(cfg);
    size_t rejected = 0;
    for (const auto& rm : res.rounds)
      for (const auto& rej : rm.rejections) {
        CHECK(rej.reason == "fake-trust");
        ++rejected;
      }
    size_t active = kind == AttackKind::fake_trust_replay ? 2 : 3;
    CHECK(rejected == res.malicious_count * active);
  }
}

TEST_CASE("internal badmouth ends with lower trust") {
  auto cfg = small_cfg();
  cfg.sum = 10;
  auto res = run_scenario(cfg);
  CHECK(res.mean_honest_trust > res.mean_malicious_trust + 0.2);
  for (const auto& rm : res.rounds) CHECK(rm.rejections.empty());
}

TEST_CASE("link probe ablations are fully linkable") {
  auto cfg = small_cfg();
  cfg.rho = 0.0;
  cfg.sum = 8;
  auto no_perturb = cfg;
  no_perturb.perturbation_enabled = false;
  CHECK(link_attack_probe(no_perturb).accuracy == doctest::Approx(1.0));
  auto no_rotation = cfg;
  no_rotation.pid_rotation_enabled = false;
  CHECK(link_attack_probe(no_rotation).accuracy == doctest::Approx(1.0));
}

TEST_CASE("emit_results writes the five files with exact headers") {
  namespace fs = std::filesystem;
  auto cfg = small_cfg();
  auto res = run_scenario(cfg);
  fs::path dir = fs::temp_directory_path() / "tpcs-emit-test";
  fs::remove_all(dir);
  emit_results(res, dir.string());

  auto first_line = [&](const char* name) {
    std::ifstream in(dir / name);
    std::string line;
    std::getline(in, line);
    return line;
  };
  CHECK(first_line("reputation.csv") == "round,customer,iteration,RS");
  CHECK(first_line("trust.csv") == "round,processor-real-id,trust,breaker_flag");
  CHECK(first_line("rejections.csv") == "round,pid,reason");
  CHECK(first_line("ops.csv") == "round,check_type,pairing_count,batch_size");
  CHECK(fs::exists(dir / "summary.json"));
  fs::remove_all(dir);
}

TEST_CASE("same config and seed give byte-identical output") {
  namespace fs = std::filesystem;
  auto cfg = small_cfg();
  fs::path a = fs::temp_directory_path() / "tpcs-det-a";
  fs::path b = fs::temp_directory_path() / "tpcs-det-b";
  fs::remove_all(a);
  fs::remove_all(b);
  emit_results(run_scenario(cfg), a.string());
  emit_results(run_scenario(cfg), b.string());
  for (const char* name : {"reputation.csv", "trust.csv", "rejections.csv",
                           "ops.csv", "summary.json"})
    CHECK(slurp(a / name) == slurp(b / name));
  fs::remove_all(a);
  fs::remove_all(b);
}
