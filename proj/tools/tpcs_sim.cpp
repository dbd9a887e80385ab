#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "tpcs/sim_harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"trust-based customer selection simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  uint64_t seed = 0;
  bool seed_given = false;

  auto* run = app.add_subcommand("run", "run one scenario and emit metrics");
  run->add_option("--config", config_path, "key=value scenario file")
      ->required();
  run->add_option("--seed", seed, "override the config's rng seed")
      ->each([&](const std::string&) { seed_given = true; });
  run->add_option("--out", out_dir, "output directory");

  auto* suite = app.add_subcommand(
      "attack-suite", "run the resilience scenarios with their assertions");
  suite->add_option("--config", config_path, "base scenario file")->required();
  suite->add_option("--out", out_dir, "output directory");

  app.add_subcommand("selftest", "crypto property suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      tpcs::ScenarioConfig cfg = tpcs::parse_config_file(config_path);
      if (seed_given) cfg.seed = seed;
      auto result = tpcs::run_scenario(cfg);
      tpcs::emit_results(result, out_dir);
      bool ok = true;
      for (const auto& rm : result.rounds) {
        ok &= rm.shadow_match;
        ok &= rm.accepted + rm.rejections.size() == rm.submitted;
      }
      std::printf("%d rounds, honest trust %.4f, malicious trust %.4f\n",
                  int(result.rounds.size()), result.mean_honest_trust,
                  result.mean_malicious_trust);
      if (!ok) {
        std::fprintf(stderr, "internal consistency check failed\n");
        return 1;
      }
      return 0;
    }
    if (suite->parsed()) {
      tpcs::ScenarioConfig cfg = tpcs::parse_config_file(config_path);
      return tpcs::run_attack_suite(cfg, out_dir) == 0 ? 0 : 1;
    }
    return tpcs::run_selftest() == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
