#include "doctest.h"

#include <cmath>
#include <set>
#include <stdexcept>

#include "geo/archive.hpp"

using namespace geo;

namespace {

/// Strategies sharing the no-op cell, told apart by their clause sets.
Strategy in_base_cell(const std::string& id, std::vector<int> clauses) {
  Genotype g = noop_genotype();
  g.clauses = std::move(clauses);
  return make_strategy(id, g);
}

/// Strategies in distinct cells, one per tone.
Strategy in_tone_cell(const std::string& id, Tone t) {
  Genotype g = noop_genotype();
  g.tone = t;
  return make_strategy(id, g);
}

ArchiveConfig reward_only(std::size_t capacity = 35) {
  ArchiveConfig c;
  c.capacity = capacity;
  c.lambda_pnd = 0.0;
  return c;
}

}  // namespace

TEST_CASE("ngram similarity examples") {
  CHECK(ngram_similarity("abcde", "abcde", 3) == 1.0);
  CHECK(ngram_similarity("abcd", "bcde", 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(ngram_similarity("abc", "xyz", 3) == 0.0);
  CHECK(ngram_similarity("", "", 3) == 1.0);
}

TEST_CASE("novelty examples") {
  Archive a;
  const auto s = in_base_cell("s", {0});
  CHECK(a.novelty(s) == 1.0);
  a.try_insert(s, 1.0, RewardSource::ge);
  auto twin = s;
  twin.id = "twin";
  CHECK(a.novelty(twin) == 0.0);

  Genotype x = noop_genotype();
  Strategy probe = make_strategy("probe", x);
  probe.summary = "bcde";
  Archive b;
  Strategy sole = make_strategy("sole", x);
  sole.summary = "abcd";
  b.try_insert(sole, 1.0, RewardSource::ge);
  CHECK(b.novelty(probe) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("diversity examples") {
  Strategy fresh = seed_strategies()[0];
  const double f = static_cast<double>(active_field_count(fresh.genotype)) / kTrackedFieldCount;
  CHECK(diversity(fresh) == doctest::Approx(f / 3.0).epsilon(1e-15));

  Strategy one = fresh;
  one.lineage.depth = 1;
  one.lineage.ops = {Op::mut_C_strengthen};
  const double f1 = static_cast<double>(active_field_count(one.genotype)) / kTrackedFieldCount;
  CHECK(diversity(one) == doctest::Approx((0.2 + 1.0 / 14.0 + f1) / 3.0).epsilon(1e-15));

  Strategy full = fresh;
  full.lineage.depth = 7;
  full.lineage.ops.assign(all_ops().begin(), all_ops().end());
  Genotype& g = full.genotype;
  g.intent = Intent::statistics;
  g.clauses = {0};
  g.strength = Strength::strict;
  g.steps = {0};
  g.self_check = g.conflict_resolution = g.post_check = true;
  g.schema = Schema::bullets;
  g.use_code_block = g.has_prelude = true;
  g.tone = Tone::formal;
  g.length = LengthPolicy::shorten;
  CHECK(active_field_count(g) == kTrackedFieldCount);
  CHECK(diversity(full) == doctest::Approx(1.0));
}

TEST_CASE("pnd arithmetic") {
  CHECK(pnd_value(0.6, 0.4, 0.2, 0.3) == doctest::Approx(0.78).epsilon(1e-15));
  CHECK(pnd_value(0.6, 0.4, 0.2, 0.0) == 0.6);
  CHECK(pnd_value(0.6, 0.0, 0.0, 0.3) == 0.6);
}

TEST_CASE("value-novelty gate") {
  Archive a;
  CHECK(a.try_insert(in_base_cell("a", {0}), 0.9, RewardSource::ge).outcome == InsertOutcome::inserted);
  CHECK(a.try_insert(in_base_cell("dup", {0}), 5.0, RewardSource::ge).outcome == InsertOutcome::rejected_novelty);
  CHECK(a.try_insert(in_base_cell("b", {1}), 0.8, RewardSource::ge).outcome == InsertOutcome::inserted);
  CHECK(a.try_insert(in_base_cell("c", {2}), 0.7, RewardSource::ge).outcome == InsertOutcome::inserted);

  CHECK(a.try_insert(in_base_cell("low", {3}), 0.6, RewardSource::ge).outcome == InsertOutcome::rejected_value);
  const auto d = a.try_insert(in_base_cell("d", {4}), 0.75, RewardSource::ge);
  CHECK(d.outcome == InsertOutcome::replaced);
  CHECK(d.replaced_id == "c");
  REQUIRE(a.cells().size() == 1);
  std::vector<double> rewards;
  for (const auto& e : a.cells().begin()->second) rewards.push_back(e.strategy.reward);
  CHECK(rewards == std::vector<double>{0.9, 0.8, 0.75});

  CHECK_THROWS_AS(a.try_insert(in_base_cell("a", {7}), 1.0, RewardSource::ge), std::invalid_argument);
  CHECK_THROWS_AS(a.try_insert(in_base_cell("nan", {7}), std::nan(""), RewardSource::ge), std::invalid_argument);
}

TEST_CASE("prune removes lowest pnd and spares sole cell members when it can") {
  Archive none(reward_only(5));
  none.try_insert(in_tone_cell("a", Tone::assertive), 1, RewardSource::ge);
  CHECK(none.prune().empty());

  Archive a(reward_only(2));
  a.try_insert(in_tone_cell("hi", Tone::assertive), 0.9, RewardSource::ge);
  a.try_insert(in_tone_cell("mid", Tone::simple), 0.5, RewardSource::ge);
  a.try_insert(in_tone_cell("lo", Tone::formal), 0.4, RewardSource::ge);
  CHECK(a.prune() == std::vector<std::string>{"lo"});
  CHECK(a.size() == 2);

  Archive b(reward_only(2));
  b.try_insert(in_tone_cell("alone", Tone::assertive), 0.1, RewardSource::ge);
  b.try_insert(in_base_cell("x", {0}), 0.5, RewardSource::ge);
  b.try_insert(in_base_cell("y", {1}), 0.9, RewardSource::ge);
  CHECK(b.prune() == std::vector<std::string>{"x"});
  CHECK(b.find("alone") != nullptr);
}

TEST_CASE("prune tie-break removes the older strategy") {
  Archive a(reward_only(1));
  a.try_insert(in_base_cell("old", {0}), 0.5, RewardSource::ge);
  a.try_insert(in_base_cell("new", {1}), 0.5, RewardSource::ge);
  CHECK(a.prune() == std::vector<std::string>{"old"});
}

TEST_CASE("observe keeps a running mean") {
  Archive a;
  a.try_insert(in_base_cell("a", {0}), 4.0, RewardSource::critic);
  CHECK(a.observe("a", 2.0));
  CHECK(a.observe("a", 0.0));
  const auto* e = a.find("a");
  REQUIRE(e != nullptr);
  CHECK(e->observations == 3);
  CHECK(e->strategy.reward == doctest::Approx(2.0));
  CHECK(e->strategy.source == RewardSource::ge);
  CHECK_FALSE(a.observe("missing", 1.0));
  CHECK(a.find_by_summary(e->strategy.summary) == e);
  CHECK(a.find_by_summary("nope") == nullptr);
}

TEST_CASE("parent sampling") {
  Archive one;
  one.try_insert(in_base_cell("only", {0}), 1.0, RewardSource::ge);
  Rng rng(1);
  const auto p = one.sample_parents(1, rng);
  REQUIRE(p.size() == 1);
  CHECK(p[0].id == "only");

  Archive a;
  a.try_insert(in_base_cell("a", {0}), 1.0, RewardSource::ge);
  a.try_insert(in_base_cell("b", {1}), 2.0, RewardSource::ge);
  a.try_insert(in_tone_cell("c", Tone::formal), 3.0, RewardSource::ge);
  const auto all = a.sample_parents(10, rng);
  std::set<std::string> ids;
  for (const auto& s : all) ids.insert(s.id);
  CHECK(all.size() == 3);
  CHECK(ids.size() == 3);

  const int draws = 10000;
  int tone_cell = 0;
  for (int i = 0; i < draws; ++i)
    if (a.sample_parents(1, rng)[0].id == "c") ++tone_cell;
  const double sigma = std::sqrt(draws * 0.25);
  CHECK(std::abs(tone_cell - draws / 2.0) <= 3 * sigma);
}

TEST_CASE("top-k by pnd") {
  Archive a(reward_only());
  a.try_insert(in_base_cell("a", {0}), 1.0, RewardSource::ge);
  a.try_insert(in_base_cell("b", {1}), 3.0, RewardSource::ge);
  a.try_insert(in_tone_cell("c", Tone::formal), 2.0, RewardSource::ge);
  a.try_insert(in_tone_cell("d", Tone::simple), 2.0, RewardSource::ge);
  CHECK(a.top_k_by_pnd(1)[0].id == "b");
  const auto all = a.top_k_by_pnd(25);
  REQUIRE(all.size() == 4);
  CHECK(all[1].id == "d");
  CHECK(all[2].id == "c");
}

TEST_CASE("stored pnd matches recomputation and serialization round-trips") {
  Archive a;
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    Genotype g = noop_genotype();
    g.tone = static_cast<Tone>(rng.uniform(5));
    for (int c = 0; c < 6; ++c)
      if (rng.bernoulli(0.4)) g.clauses.push_back(c);
    Strategy s = make_strategy("s" + std::to_string(i), g);
    s.lineage.depth = static_cast<int>(rng.uniform(4));
    a.try_insert(s, rng.uniform01() * 10, RewardSource::ge);
  }
  a.prune();
  for (const auto* e : a.elites()) {
    const auto p = a.pnd_score(e->strategy);
    CHECK(p.pnd == e->pnd.pnd);
    CHECK(e->pnd.pnd == pnd_value(e->pnd.reward, e->pnd.novelty, e->pnd.diversity, a.config().lambda_pnd));
  }
  const auto text = a.to_jsonl();
  CHECK(Archive::from_jsonl(text).to_jsonl() == text);
}
