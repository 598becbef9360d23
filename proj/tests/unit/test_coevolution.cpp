#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <set>

#include "geo/coevolution.hpp"

using namespace geo;

namespace {

RunConfig small_config(std::uint64_t seed = 5) {
  RunConfig c;
  c.T = 6;
  c.seed = seed;
  c.dataset_size = 8;
  c.critic_dim = 512;
  c.critic_hidden = 16;
  c.warmup_contexts = 4;
  c.critic_offline_epochs = 5;
  return c;
}

Dataset small_data(std::uint64_t seed = 5) { return make_synthetic_dataset({8, 5, seed}); }

std::string reports_text(const std::vector<IterationReport>& rs) {
  std::string out;
  for (const auto& r : rs) out += to_json(r).dump() + "\n";
  return out;
}

/// Simulated engine whose rewrites can be switched off.
class SwitchableEngine : public SimulatedEngine {
 public:
  std::atomic<bool> broken{false};
  Result<Document> rewrite(const Document& d, const Strategy& s, const Query& q) override {
    if (broken) return BackendError{"rewriter offline", true};
    return SimulatedEngine::rewrite(d, s, q);
  }
};

std::filesystem::path fresh_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("screening examples") {
  Rng rng(1);
  const std::vector<double> s = {0.1, 0.9, 0.5, 0.7, 0.3, 0.2};
  CHECK(screen_candidates(s, 3, 0, rng) == std::vector<std::size_t>{1, 3, 2});
  CHECK(screen_candidates(s, 10, 0, rng).size() == 6);
  auto all = screen_candidates(s, 4, 4, rng);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  std::vector<double> sixteen(16);
  for (std::size_t i = 0; i < 16; ++i) sixteen[i] = static_cast<double>(i % 5);
  const auto sel = screen_candidates(sixteen, 4, 4, rng);
  CHECK(sel.size() == 8);
  CHECK(std::set<std::size_t>(sel.begin(), sel.end()).size() == 8);
  Rng a(9), b(9);
  CHECK(screen_candidates(sixteen, 4, 4, a) == screen_candidates(sixteen, 4, 4, b));
}

TEST_CASE("iterations respect the budget, buffer purity and best-so-far monotonicity") {
  SimulatedEngine e({.seed = 5});
  auto cfg = small_config();
  cfg.T = 10;
  Coevolution run(cfg, small_data(), e);
  const auto reports = run.run();
  REQUIRE(reports.size() == 10);
  double best = -1e300;
  for (const auto& r : reports) {
    CHECK(r.ge_calls <= static_cast<std::size_t>(cfg.K_top + cfg.K_rand));
    CHECK(r.best_ge_reward >= best);
    best = r.best_ge_reward;
    CHECK(r.archive_size <= static_cast<std::size_t>(cfg.capacity));
  }
  for (const auto& x : run.b_true()) CHECK(x.source == RewardSource::ge);
  for (const auto& x : run.b_pred()) CHECK(x.source == RewardSource::critic);
  REQUIRE_FALSE(run.b_pred().empty());
}

TEST_CASE("unscreened candidates enter the archive with critic rewards") {
  SimulatedEngine e({.seed = 5});
  Coevolution run(small_config(), small_data(), e);
  const auto r = run.step();
  REQUIRE(r.candidates > r.ge_calls);
  std::set<std::string> predicted;
  for (const auto& x : run.b_pred()) predicted.insert(x.strategy_id);
  std::size_t critic_sourced = 0;
  for (const auto* el : run.archive().elites()) {
    if (!predicted.contains(el->strategy.id)) continue;
    CHECK(el->strategy.source == RewardSource::critic);
    ++critic_sourced;
  }
  CHECK(critic_sourced > 0);
}

TEST_CASE("identical seeds give identical runs") {
  SimulatedEngine e1({.seed = 5}), e2({.seed = 5});
  Coevolution a(small_config(), small_data(), e1);
  Coevolution b(small_config(), small_data(), e2);
  CHECK(reports_text(a.run()) == reports_text(b.run()));
  CHECK(a.archive().to_jsonl() == b.archive().to_jsonl());
  CHECK(a.critic() == b.critic());
  CHECK(a.policy() == b.policy());
}

TEST_CASE("zero iterations leave the seed archive") {
  SimulatedEngine e({.seed = 5});
  auto cfg = small_config();
  cfg.T = 0;
  Coevolution run(cfg, small_data(), e);
  CHECK(run.run().empty());
  const auto seeds = seed_strategies();
  CHECK(run.archive().size() == seeds.size());
  for (const auto& s : seeds) CHECK(run.archive().find(s.id) != nullptr);
  CHECK(run.b_pred().empty());
}

TEST_CASE("a resumed run matches an uninterrupted one") {
  SimulatedEngine e1({.seed = 5}), e2({.seed = 5});
  Coevolution full(small_config(), small_data(), e1);
  full.run();

  const auto dir = fresh_dir("geo_resume_test");
  {
    Coevolution half(small_config(), small_data(), e2);
    for (int i = 0; i < 3; ++i) half.step();
    half.save(dir.string());
  }
  SimulatedEngine e3({.seed = 5});
  auto resumed = Coevolution::resume(dir.string(), e3);
  CHECK(resumed->iteration() == 3);
  resumed->run();
  CHECK(reports_text(resumed->reports()) == reports_text(full.reports()));
  CHECK(resumed->archive().to_jsonl() == full.archive().to_jsonl());
  CHECK(resumed->critic() == full.critic());
  CHECK(resumed->policy() == full.policy());
  CHECK(resumed->b_true() == full.b_true());
  CHECK(resumed->b_pred() == full.b_pred());
  std::filesystem::remove_all(dir);
}

TEST_CASE("backend failure degrades the iteration without touching the archive") {
  SwitchableEngine e;
  Coevolution run(small_config(), small_data(), e);
  std::set<std::string> before;
  for (const auto* el : run.archive().elites()) before.insert(el->strategy.id);
  const auto true_before = run.b_true().size();
  e.broken = true;
  const auto r = run.step();
  CHECK(r.degraded);
  CHECK(r.failed == r.ge_calls);
  CHECK(r.evaluated == 0);
  CHECK(run.b_true().size() == true_before);
  std::set<std::string> predicted;
  for (const auto& x : run.b_pred()) predicted.insert(x.strategy_id);
  for (const auto* el : run.archive().elites()) {
    if (before.contains(el->strategy.id)) continue;
    CHECK(predicted.contains(el->strategy.id));
    CHECK(el->strategy.source == RewardSource::critic);
  }
  e.broken = false;
  CHECK_FALSE(run.step().degraded);
}

TEST_CASE("regret universe and its operators are closed") {
  const auto uni = regret_universe();
  CHECK(uni.size() == 64);
  std::set<std::string> summaries;
  for (const auto& g : uni) summaries.insert(render_summary(g));
  CHECK(summaries.size() == 64);
  for (const auto& s : regret_seeds()) CHECK(summaries.contains(s.summary));
  CHECK(regret_seeds().size() == 5);

  const auto space = regret_space();
  Rng rng(3);
  for (int k = 0; k < 3000; ++k) {
    const Op op = space.operators[rng.uniform(space.operators.size())];
    const auto& a = uni[rng.uniform(uni.size())];
    const auto& b = uni[rng.uniform(uni.size())];
    const bool has_b = op_arity(op) == 2;
    if (!is_applicable(op, a, has_b, space)) continue;
    CHECK(summaries.contains(render_summary(apply_operator(op, a, has_b ? &b : nullptr, rng, space))));
  }
}
