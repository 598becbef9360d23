#pragma once

// Archive-driven strategy/critic co-evolution: propose, screen with the
// critic under a GE budget, evaluate, update the archive and replay buffers,
// then train the evolver (sibling AWR) and recalibrate the critic.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geo/archive.hpp"
#include "geo/config.hpp"
#include "geo/critic.hpp"
#include "geo/dataset.hpp"
#include "geo/engine.hpp"
#include "geo/evolver.hpp"
#include "geo/rng.hpp"

namespace geo {

struct ReplayEntry {
  std::string context_id;
  std::string strategy_id;
  double reward = 0.0;
  RewardSource source = RewardSource::critic;
  int iteration = 0;

  bool operator==(const ReplayEntry&) const = default;
};

nlohmann::json to_json(const ReplayEntry& e);
ReplayEntry replay_entry_from_json(const nlohmann::json& j);

struct IterationReport {
  int iteration = 0;
  std::string context_id;
  std::size_t candidates = 0;
  std::size_t evaluated = 0;
  std::size_t ge_calls = 0;  // strategy evaluations requested this iteration
  std::size_t failed = 0;
  bool degraded = false;
  std::size_t inserted = 0;
  std::size_t replaced = 0;
  std::size_t rejected_novelty = 0;
  std::size_t rejected_value = 0;
  std::size_t refreshed = 0;  // GE re-measurements of already archived genotypes
  std::size_t pruned = 0;
  std::size_t archive_size = 0;
  double best_ge_reward = 0.0;  // best GE-verified reward so far
  double critic_loss = 0.0;
  double evolver_loss_before = 0.0;
  double evolver_loss_after = 0.0;
};

nlohmann::json to_json(const IterationReport& r);

/// Indices of the candidates to send to the engine: the top K_top by score
/// (ties by lower index), plus K_rand uniform draws from the rest.
std::vector<std::size_t> screen_candidates(const std::vector<double>& scores, int K_top, int K_rand, Rng& rng);

/// Everything the loop needs besides the config and data.
struct CoevolutionOptions {
  SearchSpace space = SearchSpace::full();
  std::vector<Strategy> seeds = seed_strategies();
};

class Coevolution {
 public:
  /// Builds the initial state: the seed archive, an offline-aligned critic
  /// (GE labels for the seeds on `warmup_contexts` contexts) and a uniform
  /// evolver policy.
  Coevolution(RunConfig cfg, Dataset data, Engine& engine, CoevolutionOptions opts = {});

  /// Dataset index of the context the next `step()` will use.
  std::size_t next_context_index() const;
  /// Runs one iteration on the next context in the fixed round-robin order.
  IterationReport step();
  /// Runs one iteration on the given dataset context.
  IterationReport step_on(std::size_t context_index);
  /// Runs until `cfg.T` iterations have completed.
  std::vector<IterationReport> run();

  int iteration() const { return iteration_; }
  const RunConfig& config() const { return cfg_; }
  const Dataset& dataset() const { return data_; }
  const Archive& archive() const { return archive_; }
  const Critic& critic() const { return critic_; }
  const EvolverPolicy& policy() const { return policy_; }
  const std::vector<ReplayEntry>& b_true() const { return b_true_; }
  const std::vector<ReplayEntry>& b_pred() const { return b_pred_; }
  const std::vector<IterationReport>& reports() const { return reports_; }
  const Strategy* strategy(const std::string& id) const;
  std::size_t warmup_ge_calls() const { return warmup_ge_calls_; }
  std::size_t context_index(const std::string& context_id) const;

  double critic_score(const Example& x, const Strategy& s) const;

  /// Writes the run directory: config.cfg, dataset.jsonl, archive.jsonl,
  /// b_true.jsonl, b_pred.jsonl, strategies.jsonl, experiences.jsonl,
  /// critic.bin, policy.json, reports.jsonl, state.json.
  void save(const std::string& dir) const;
  /// Restores a run saved by `save`; continuing it matches an uninterrupted run.
  static std::unique_ptr<Coevolution> resume(const std::string& dir, Engine& engine, CoevolutionOptions opts = {});

 private:
  struct Restore {};
  Coevolution(Restore, RunConfig cfg, Dataset data, Engine& engine, CoevolutionOptions opts);

  void warm_start();
  LabeledSample labeled(const ReplayEntry& e) const;
  const ContextFeatures& context_features(std::size_t context_index) const;
  const FeatureVector& strategy_features(const Strategy& s) const;
  std::string next_id();
  std::vector<std::size_t> replay_indices(std::size_t n_total, std::size_t n_new, std::size_t k);

  RunConfig cfg_;
  Dataset data_;
  Engine& engine_;
  CoevolutionOptions opts_;
  StrategyEvaluator evaluator_;
  Archive archive_;
  Critic critic_;
  EvolverPolicy policy_;
  Rng rng_;
  int iteration_ = 0;
  std::uint64_t id_counter_ = 0;
  std::vector<std::size_t> order_;
  std::map<std::string, std::size_t> context_index_;
  std::map<std::string, Strategy> strategies_;
  std::vector<ReplayEntry> b_true_;
  std::vector<ReplayEntry> b_pred_;
  std::vector<Experience> experiences_;
  std::vector<IterationReport> reports_;
  double best_ge_ = 0.0;
  bool have_best_ = false;
  std::size_t warmup_ge_calls_ = 0;

  // Featurization caches; features depend only on the texts and the critic's
  // hashing dimensions, never on its weights.
  mutable std::vector<std::optional<ContextFeatures>> context_cache_;
  mutable std::map<std::string, FeatureVector> strategy_cache_;
};

CriticConfig critic_config(const RunConfig& cfg);

/// Mean GE gain of `s` over every context of `data` (failed evaluations are
/// skipped; empty when none succeeds).
std::optional<double> mean_ge_gain(StrategyEvaluator& ev, const Dataset& data, const Strategy& s);

/// Best mean GE gain over a set of strategies.
double best_mean_ge_gain(StrategyEvaluator& ev, const Dataset& data, const std::vector<Strategy>& pool);

// ---- finite-universe regret harness ----

/// 64 genotypes: intent none, every subset of the four lever clauses, strength
/// normal or strict, length keep or shorten.
std::vector<Genotype> regret_universe();
/// The operators and vocabularies that keep offspring inside the universe.
SearchSpace regret_space();
/// The empty-clause base plus the four single-clause genotypes.
std::vector<Strategy> regret_seeds();

struct RegretReport {
  std::vector<double> instant;     // r* - r(s_t) per iteration
  std::vector<double> cumulative;  // running sum
  double regret_at(int t) const { return t <= 0 ? 0.0 : cumulative.at(static_cast<std::size_t>(t) - 1); }
  double average_at(int t) const { return regret_at(t) / t; }
};

/// Before each iteration, picks s_t = argmax of the critic over the archive on
/// the iteration's context and charges r*(x_t) - r(s_t, x_t), with rewards
/// from a brute-force table over the universe.
RegretReport run_regret(const RunConfig& cfg, const Dataset& data, Engine& engine, int T);

}  // namespace geo
