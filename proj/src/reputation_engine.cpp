#include "tpcs/reputation_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tpcs {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

ReputationState make_state(double initial_rs,
                           const std::vector<double>& feedbacks) {
  if (feedbacks.empty())
    throw std::invalid_argument("truth discovery: empty feedback table");
  ReputationState s;
  s.feedbacks = feedbacks;
  s.retained.assign(feedbacks.size(), 1);
  s.weights.assign(feedbacks.size(), 0.0);
  s.rs = initial_rs;
  return s;
}

void filter_step(ReputationState& state, const EngineConfig& cfg) {
  std::vector<char> next(state.feedbacks.size(), 0);
  size_t kept = 0;
  for (size_t j = 0; j < state.feedbacks.size(); ++j) {
    if (!state.retained[j]) continue;
    if (std::fabs(state.feedbacks[j] - state.rs) < cfg.u_threshold) {
      next[j] = 1;
      ++kept;
    }
  }
  if (kept == 0) {
    state.filter_skipped = true;  // keep the previous set this round
    return;
  }
  state.retained = std::move(next);
}

void weight_step(ReputationState& state, const EngineConfig& cfg) {
  double sum_d = 0.0;
  for (size_t j = 0; j < state.feedbacks.size(); ++j) {
    if (!state.retained[j]) continue;
    double diff = state.feedbacks[j] - state.rs;
    sum_d += diff * diff;
  }
  for (size_t j = 0; j < state.feedbacks.size(); ++j) {
    if (!state.retained[j]) continue;
    double diff = state.feedbacks[j] - state.rs;
    double d = std::max(diff * diff, cfg.distance_eps);
    state.weights[j] = std::max(std::log(sum_d / d), cfg.weight_floor);
  }
}

void score_step(ReputationState& state, const EngineConfig& cfg) {
  double num = 0.0, den = 0.0;
  for (size_t j = 0; j < state.feedbacks.size(); ++j) {
    if (!state.retained[j]) continue;
    num += state.weights[j] * state.feedbacks[j];
    den += state.weights[j];
  }
  if (den <= 0.0) throw std::logic_error("score_step: zero weight sum");
  state.rs = num / den;
  ++state.iteration;
}

TruthDiscoveryResult run_truth_discovery(double initial_rs,
                                         const std::vector<double>& feedbacks,
                                         const EngineConfig& cfg) {
  ReputationState state = make_state(initial_rs, feedbacks);
  TruthDiscoveryResult result;
  result.rs_by_iteration.push_back(initial_rs);
  for (int v = 0; v < cfg.max_iterations; ++v) {
    double prev = state.rs;
    filter_step(state, cfg);
    weight_step(state, cfg);
    score_step(state, cfg);
    result.rs_by_iteration.push_back(state.rs);
    if (std::fabs(state.rs - prev) < cfg.convergence_eps) break;
  }
  result.rs = state.rs;
  result.iterations = state.iteration;
  result.retained = state.retained;
  result.filter_skipped = state.filter_skipped;
  return result;
}

double trust_quality(double feedback, double rs, int iterations,
                     const EngineConfig& cfg) {
  double diff = std::fabs(feedback - rs);
  double t;
  if (diff < cfg.f_threshold) {
    t = 1.0 - std::pow(diff, double(iterations) * cfg.c0);
  } else {
    t = 1.0 - diff;
  }
  return clamp01(t);
}

double ewma_predict(double past, double current, const EngineConfig& cfg) {
  return cfg.alpha * past + (1.0 - cfg.alpha) * current;
}

std::pair<double, bool> circuit_breaker(double past, double current,
                                        double predicted, bool breaker_flag,
                                        const EngineConfig& cfg) {
  if (past - current > cfg.t_threshold) return {cfg.t0, true};
  if (breaker_flag) return {clamp01(cfg.c1 * predicted), breaker_flag};
  return {clamp01(predicted), breaker_flag};
}

}  // namespace tpcs
