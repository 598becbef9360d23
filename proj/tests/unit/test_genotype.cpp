#include "doctest.h"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "geo/genotype.hpp"

using namespace geo;

namespace {

const Strategy& seed_named(const std::vector<Strategy>& seeds, Intent i) {
  for (const auto& s : seeds)
    if (s.genotype.intent == i) return s;
  throw std::runtime_error("seed not found");
}

}  // namespace

TEST_CASE("summary lists non-default categorical fields") {
  Genotype g = noop_genotype();
  CHECK(render_summary(g) == "Default");
  g.tone = Tone::assertive;
  g.schema = Schema::bullets;
  g.strength = Strength::strict;
  CHECK(render_summary(g) == "Tone:Assertive|Format:Bullets|Constraint:Strict");
}

TEST_CASE("summary ignores instruction free text") {
  Genotype a = seed_strategies()[0].genotype;
  Genotype b = a;
  b.instruction = "An entirely different wording of the task.";
  CHECK(render_summary(a) == render_summary(b));
}

TEST_CASE("seed prompts carry their appendix task and constraints") {
  const auto seeds = seed_strategies();
  CHECK(seeds.size() == 9);
  CHECK(render_prompt(seed_named(seeds, Intent::statistics).genotype).find("Statistics must be verifiable") !=
        std::string::npos);
  const auto& cite = seed_named(seeds, Intent::cite_sources).genotype;
  CHECK(render_prompt(cite).find("do not fabricate sources") != std::string::npos);
  CHECK(std::find(cite.clauses.begin(), cite.clauses.end(), clause_index("VerifiableCitations")) !=
        cite.clauses.end());
  std::set<std::string> summaries;
  for (const auto& s : seeds) summaries.insert(s.summary);
  CHECK(summaries.size() == 9);
}

TEST_CASE("empty constraint list emits no constraints section") {
  Genotype g = noop_genotype();
  g.instruction = "Rewrite the document.";
  const auto with_none = render_prompt(g);
  g.clauses = {0};
  const auto with_one = render_prompt(g);
  CHECK(with_one.find(std::string(clause_library()[0].text)) != std::string::npos);
  CHECK(with_none.find(std::string(clause_library()[0].text)) == std::string::npos);
  CHECK(with_none.find("Constraints") == std::string::npos);
}

TEST_CASE("prompt rendering is injective over a categorical grid") {
  std::set<std::string> prompts;
  std::size_t n = 0;
  for (int t = 0; t < 5; ++t)
    for (int f = 0; f < 4; ++f)
      for (int c = 0; c < 3; ++c)
        for (int l = 0; l < 3; ++l)
          for (int cb = 0; cb < 2; ++cb)
            for (int tech = 0; tech < 3; ++tech) {
              Genotype g = noop_genotype();
              g.tone = static_cast<Tone>(t);
              g.schema = static_cast<Schema>(f);
              g.strength = static_cast<Strength>(c);
              g.length = static_cast<LengthPolicy>(l);
              g.use_code_block = cb == 1;
              g.technicality = static_cast<Technicality>(tech);
              prompts.insert(render_prompt(g));
              ++n;
            }
  CHECK(prompts.size() == n);
}

TEST_CASE("descriptor mapping") {
  const auto seeds = seed_strategies();
  const auto d = descriptor(seed_named(seeds, Intent::authoritative).genotype);
  CHECK(d[8] == static_cast<int>(Tone::assertive));
  CHECK(d[3] == 0);
  CHECK(d[1] == static_cast<int>(Schema::prose));

  Genotype g = noop_genotype();
  g.steps = {0, 1};
  CHECK(descriptor(g)[11] == 1);
  g.steps.push_back(2);
  CHECK(descriptor(g)[11] == 2);

  CHECK(steps_bucket(0) == 0);
  CHECK(steps_bucket(2) == 1);
  CHECK(steps_bucket(5) == 2);
  CHECK(steps_bucket(6) == 3);
  CHECK(steps_bucket(8) == 3);

  Genotype h = seeds[3].genotype;
  Genotype h2 = h;
  h2.instruction = "free text differs";
  CHECK(descriptor(h) == descriptor(h2));
}

TEST_CASE("descriptor axes stay within their cardinalities") {
  Rng rng(1);
  for (const auto& seed : seed_strategies()) {
    Genotype g = seed.genotype;
    for (int k = 0; k < 50; ++k) {
      const auto d = descriptor(g);
      for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d[i] >= 0);
        CHECK(d[i] < kDescriptorCardinality[i]);
      }
      std::vector<Op> ops;
      for (Op op : all_ops())
        if (op_arity(op) == 1 && is_applicable(op, g, false, SearchSpace::full())) ops.push_back(op);
      g = apply_operator(ops[rng.uniform(ops.size())], g, nullptr, rng);
    }
  }
}

TEST_CASE("operator examples") {
  Rng rng(2);
  Genotype g = noop_genotype();
  CHECK(apply_operator(Op::mut_T_toggle_tone, g, nullptr, rng).tone == Tone::assertive);

  const auto s = apply_operator(Op::mut_C_strengthen, g, nullptr, rng);
  CHECK(s.clauses.size() == 1);
  CHECK(s.strength == Strength::normal);

  const Genotype a = seed_strategies()[4].genotype;
  for (int i = 0; i < 20; ++i) CHECK(apply_operator(Op::cx_swap_gene, a, &a, rng) == a);

  CHECK_THROWS_AS(apply_operator(Op::cx_swap_gene, a, nullptr, rng), std::invalid_argument);
  CHECK_THROWS_AS(apply_operator(Op::cx_conflict_synthesis, a, nullptr, rng), std::invalid_argument);
}

TEST_CASE("catalog has twelve mutations and two crossovers with prefixed names") {
  CHECK(all_ops().size() == 14);
  int mut = 0, cx = 0;
  for (Op op : all_ops()) {
    const auto name = op_name(op);
    if (op_arity(op) == 1) {
      CHECK(name.starts_with("mut_"));
      ++mut;
    } else {
      CHECK(name.starts_with("cx_"));
      ++cx;
    }
    CHECK(op_from_name(name) == op);
  }
  CHECK(mut == 12);
  CHECK(cx == 2);
  CHECK_FALSE(op_from_name("mut_unknown").has_value());
}

TEST_CASE("every applicable mutation changes the descriptor or the prompt") {
  Rng rng(3);
  for (const auto& seed : seed_strategies()) {
    for (Op op : all_ops()) {
      if (op_arity(op) != 1 || !is_applicable(op, seed.genotype, false, SearchSpace::full())) continue;
      for (int k = 0; k < 5; ++k) {
        const auto child = apply_operator(op, seed.genotype, nullptr, rng);
        const bool changed = descriptor(child) != descriptor(seed.genotype) ||
                             render_prompt(child) != render_prompt(seed.genotype);
        CHECK_MESSAGE(changed, op_name(op), " on ", seed.id);
      }
    }
  }
}

TEST_CASE("operator outputs satisfy genotype invariants under fuzzing") {
  Rng rng(4);
  const auto seeds = seed_strategies();
  std::vector<Genotype> pop;
  for (const auto& s : seeds) pop.push_back(s.genotype);
  for (int k = 0; k < 3000; ++k) {
    const Op op = all_ops()[rng.uniform(all_ops().size())];
    const Genotype& a = pop[rng.uniform(pop.size())];
    const Genotype& b = pop[rng.uniform(pop.size())];
    const bool has_b = op_arity(op) == 2;
    if (!is_applicable(op, a, has_b, SearchSpace::full())) continue;
    Genotype child = apply_operator(op, a, has_b ? &b : nullptr, rng);
    CHECK_NOTHROW(validate(child));
    CHECK(child.clauses.size() <= kMaxClauses);
    CHECK(child.steps.size() <= kMaxSteps);
    if (pop.size() < 200) pop.push_back(child);
    else pop[rng.uniform(pop.size())] = child;
  }
}

TEST_CASE("genotype and strategy JSON round trip") {
  for (const auto& s : seed_strategies()) {
    CHECK(genotype_from_json(to_json(s.genotype)) == s.genotype);
    CHECK(strategy_from_json(to_json(s)) == s);
  }
  auto j = to_json(noop_genotype());
  j["T"]["tone"] = "sarcastic";
  CHECK_THROWS_AS(genotype_from_json(j), std::invalid_argument);
}

TEST_CASE("summary and descriptor are stable for equal genotypes") {
  const auto a = seed_strategies();
  const auto b = seed_strategies();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(render_summary(a[i].genotype) == render_summary(b[i].genotype));
    CHECK(descriptor(a[i].genotype) == descriptor(b[i].genotype));
    CHECK(a[i].summary == render_summary(a[i].genotype));
  }
}
