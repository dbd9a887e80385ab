#pragma once

#include <utility>
#include <vector>

namespace tpcs {

struct EngineConfig {
  double u_threshold = 0.5;    // filter band around the current score
  double f_threshold = 0.2;    // reward band for trust quality
  double t_threshold = 0.5;    // circuit-breaker drop
  double c0 = 0.1;             // reward sensitivity
  double c1 = 0.85;            // forgetting factor
  double alpha = 0.3;          // EWMA impact factor
  double t0 = 0.01;            // initial trust
  int max_iterations = 10;
  double convergence_eps = 1e-4;
  double weight_floor = 1e-6;
  double distance_eps = 1e-9;
  // Once tripped, the forgetting factor stays applied ("in a long time" is
  // left open by the scheme; permanent is the default).
  bool breaker_permanent = true;
};

// Per-task iterative truth-discovery state.
struct ReputationState {
  std::vector<double> feedbacks;  // fixed over the task
  std::vector<char> retained;     // parallel to feedbacks
  std::vector<double> weights;    // parallel; meaningful for retained only
  double rs = 0.0;
  int iteration = 0;
  bool filter_skipped = false;
};

ReputationState make_state(double initial_rs,
                           const std::vector<double>& feedbacks);

// Retain j iff |f_j - RS| < U_threshold. If nothing would survive, the round
// keeps the previous set and records the skip.
void filter_step(ReputationState& state, const EngineConfig& cfg);
// w_j = log(sum_d / max(d_j, distance_eps)) clamped below at weight_floor,
// with d = (f - RS)^2.
void weight_step(ReputationState& state, const EngineConfig& cfg);
// RS <- weighted mean of retained feedbacks.
void score_step(ReputationState& state, const EngineConfig& cfg);

struct TruthDiscoveryResult {
  double rs = 0.0;
  int iterations = 0;
  std::vector<char> retained;
  std::vector<double> rs_by_iteration;  // rs_by_iteration[0] is the prior
  bool filter_skipped = false;
};

TruthDiscoveryResult run_truth_discovery(double initial_rs,
                                         const std::vector<double>& feedbacks,
                                         const EngineConfig& cfg);

// Quality of one feedback given the settled score; `iterations` is the
// truth-discovery iteration count, which acts as the accuracy reward.
double trust_quality(double feedback, double rs, int iterations,
                     const EngineConfig& cfg);

// alpha * past + (1 - alpha) * current.
double ewma_predict(double past, double current, const EngineConfig& cfg);

// Returns (final prediction, updated breaker flag).
std::pair<double, bool> circuit_breaker(double past, double current,
                                        double predicted, bool breaker_flag,
                                        const EngineConfig& cfg);

}  // namespace tpcs
