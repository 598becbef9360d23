#pragma once

// Inference-time multi-turn rewriting: pick the best unused strategy by
// critic score, rewrite, and stop once the best remaining score stops rising.

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geo/archive.hpp"
#include "geo/critic.hpp"
#include "geo/engine.hpp"

namespace geo {

enum class StopReason { none, marginal_gain, max_steps, pool_exhausted, rewrite_failed };
std::string_view stop_reason_name(StopReason r);

using ScoreFn = std::function<double(const Query&, const Document&, const Strategy&)>;
ScoreFn critic_score_fn(const Critic& c);

struct Choice {
  std::size_t index = 0;  // into the pool
  double score = 0.0;
};

/// Argmax of `score` over pool entries whose id is not in `tabu`, ties by the
/// smaller strategy id. Empty when every pool entry is tabu.
std::optional<Choice> select_strategy(const ScoreFn& score, const Query& q, const Document& d,
                                      const std::vector<Strategy>& pool, const std::set<std::string>& tabu);

/// Stop decision after a step. `best_after` is the best remaining score on the
/// new document (empty when the pool is exhausted); `steps_done` counts steps
/// taken so far. Precedence: pool_exhausted, marginal_gain, max_steps.
StopReason should_stop(double best_before, std::optional<double> best_after, int steps_done, int t_max);

struct PlanStep {
  std::string strategy_id;
  double score = 0.0;
  Document snapshot;  // document after the rewrite
};

struct PlanTrace {
  std::vector<PlanStep> steps;
  StopReason stop = StopReason::none;
  std::string error;  // set when a rewrite failed
};

struct PlanResult {
  Document document;
  PlanTrace trace;
};

struct PlannerConfig {
  std::size_t k = 25;
  int t_max = 3;
};

/// Greedy tabu plan over a fixed strategy pool.
PlanResult plan(const Query& q, const Document& d, const std::vector<Strategy>& pool, const ScoreFn& score,
                Engine& engine, int t_max);

/// Pool = top-k archive strategies by PND, scored by the critic.
PlanResult optimize(const Query& q, const Document& d, const Archive& archive, const Critic& critic, Engine& engine,
                    const PlannerConfig& cfg = {});

nlohmann::json to_json(const PlanResult& r);

}  // namespace geo
