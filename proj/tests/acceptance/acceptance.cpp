// Acceptance suite: one PASS/FAIL line per criterion. Usage: acceptance <geo-binary>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geo/archive.hpp"
#include "geo/coevolution.hpp"
#include "geo/critic.hpp"
#include "geo/evolver.hpp"
#include "geo/impressions.hpp"
#include "geo/planner.hpp"
#include "synthetic.hpp"

using namespace geo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

// ---- 1. metric oracle ----

struct RawSentence {
  std::size_t wc;
  std::vector<int> cites;
};

/// Direct evaluation of the impression definitions over the generated rows.
ImpressionScores brute_force(const std::vector<RawSentence>& rows, int j) {
  ImpressionScores s;
  const double L = static_cast<double>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool cited = false;
    for (int c : rows[i].cites) cited = cited || c == j;
    if (!cited) continue;
    const double w = rows.size() == 1 ? 1.0 : std::exp(-static_cast<double>(i) / (L - 1.0));
    const double share = 1.0 / static_cast<double>(rows[i].cites.size());
    s.word += static_cast<double>(rows[i].wc) * share;
    s.pos += w * share;
    s.overall += static_cast<double>(rows[i].wc) * w * share;
  }
  return s;
}

Outcome metric_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  double worst = 0.0;
  int single_mismatch = 0, singles = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform(8));
    const std::size_t L = 1 + rng.uniform(12);
    std::vector<RawSentence> rows;
    std::string raw;
    for (std::size_t i = 0; i < L; ++i) {
      RawSentence r{1 + rng.uniform(30), {}};
      for (int c = 1; c <= n; ++c)
        if (rng.bernoulli(0.35)) r.cites.push_back(c);
      for (std::size_t w = 0; w < r.wc; ++w) raw += (w ? " tok" : "Tok") + std::to_string(rng.uniform(1000));
      raw += ".";
      for (int c : r.cites) raw += "[" + std::to_string(c) + "]";
      raw += " ";
      rows.push_back(r);
    }
    const auto parsed = parse_cited_answer(raw, n);
    if (parsed.length() != L) return {false, "parse produced " + std::to_string(parsed.length()) + " sentences"};
    for (int j = 1; j <= n; ++j) {
      const auto got = compute_impressions(parsed, j);
      const auto want = brute_force(rows, j);
      worst = std::max({worst, rel_err(got.word, want.word), rel_err(got.pos, want.pos),
                        rel_err(got.overall, want.overall)});
      if (L == 1) {
        ++singles;
        if (got.overall != got.word) ++single_mismatch;
      }
    }
  }
  const double dt = seconds_since(t0);
  const bool pass = worst <= 1e-9 && single_mismatch == 0 && singles > 0 && dt < 5.0;
  return {pass, "max rel err " + fmt(worst) + " (<= 1e-9), L=1 overall!=word in " + std::to_string(single_mismatch) +
                    "/" + std::to_string(singles) + ", " + fmt(dt, 3) + " s (< 5)"};
}

// ---- 2. sensitivity ----

Outcome sensitivity_examples() {
  const std::vector<double> equal(9, 3.0);
  const std::vector<double> one = {10, 0, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<double> two = {10, 6, 5, 0, 0, 0, 0, 0, 0};
  const double a = sensitivity_profile(equal).sensitivity;
  const double b = sensitivity_profile(one).sensitivity;
  const double c = sensitivity_profile(two).sensitivity;
  const bool pass = a == 0.0 && b == 1.0 - 1.0 / 9.0 && c == 1.0 - 2.0 / 9.0;
  return {pass, "got " + fmt(a, 17) + ", " + fmt(b, 17) + ", " + fmt(c, 17) + " (exact 0, 8/9, 7/9)"};
}

// ---- 3. archive fuzz ----

Genotype random_genotype(Rng& rng) {
  Genotype g = noop_genotype();
  g.tone = static_cast<Tone>(rng.uniform(3));
  g.schema = static_cast<Schema>(rng.uniform(2));
  g.strength = static_cast<Strength>(rng.uniform(3));
  const int nclauses = static_cast<int>(clause_library().size());
  for (int c = 0; c < nclauses && g.clauses.size() < kMaxClauses; ++c)
    if (rng.bernoulli(0.15)) g.clauses.push_back(c);
  if (rng.bernoulli(0.3)) g.steps.push_back(static_cast<int>(rng.uniform(step_library().size())));
  return g;
}

Outcome archive_fuzz() {
  const auto t0 = std::chrono::steady_clock::now();
  ArchiveConfig cfg;
  cfg.capacity = 35;
  Archive a(cfg);
  Rng rng(77);
  int oversize = 0, similar = 0, min_drop = 0, replacements = 0, ops = 0;
  for (int k = 0; k < 10000; ++k, ++ops) {
    if (rng.bernoulli(0.1)) {
      a.prune();
    } else {
      Strategy s = make_strategy("f" + std::to_string(k), random_genotype(rng));
      s.lineage.depth = static_cast<int>(rng.uniform(6));
      const auto key = descriptor(s.genotype);
      double min_before = 0.0;
      const auto it = a.cells().find(key);
      const bool had = it != a.cells().end() && !it->second.empty();
      if (had) min_before = it->second.back().strategy.reward;
      const auto d = a.try_insert(s, rng.normal(0.0, 3.0), RewardSource::ge);
      if (d.outcome == InsertOutcome::replaced) {
        ++replacements;
        if (a.cells().at(key).back().strategy.reward < min_before) ++min_drop;
      }
    }
    for (const auto& [key, cell] : a.cells()) {
      if (cell.size() > cfg.cell_capacity) ++oversize;
      for (std::size_t i = 0; i < cell.size(); ++i)
        for (std::size_t j = i + 1; j < cell.size(); ++j)
          if (ngram_similarity(cell[i].strategy.summary, cell[j].strategy.summary, 3) > 0.9) ++similar;
    }
  }
  const auto text = a.to_jsonl();
  const bool round_trip = Archive::from_jsonl(text).to_jsonl() == text;
  const double dt = seconds_since(t0);
  const bool pass = oversize == 0 && similar == 0 && min_drop == 0 && replacements > 0 && round_trip && dt < 30.0;
  return {pass, std::to_string(ops) + " ops, " + std::to_string(replacements) + " replacements; oversize " +
                    std::to_string(oversize) + ", similar pairs " + std::to_string(similar) + ", min drops " +
                    std::to_string(min_drop) + ", round trip " + (round_trip ? "identical" : "DIFFERS") + ", " +
                    fmt(dt, 3) + " s (< 30)"};
}

// ---- 4. loss gradients ----

Outcome loss_gradients() {
  Rng rng(404);
  const auto seeds = seed_strategies();
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    CriticConfig cfg;
    cfg.dim = 32 + static_cast<int>(rng.uniform(64));
    cfg.hidden = 2 + static_cast<int>(rng.uniform(6));
    cfg.seed = 1000 + static_cast<std::uint64_t>(inst);
    Critic c(cfg);
    for (double& w : c.w2) w = rng.normal();
    for (double& b : c.b1) b = rng.normal(0.0, 0.2);
    c.b2 = rng.normal();
    std::vector<LabeledSample> s;
    const std::size_t n = 4 + rng.uniform(6);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string ctx = "c" + std::to_string(i % 2);
      const Query q{ctx, "What affects battery lifetime in phones?"};
      const Document d{"d" + ctx, "Battery health depends on heat and charge cycles.", 0};
      s.push_back({c.featurizer().features(q, d, seeds[rng.uniform(seeds.size())]), rng.normal(0.0, 2.0), ctx,
                   "s" + std::to_string(i)});
    }
    Rng prng(static_cast<std::uint64_t>(inst));
    const auto pairs = build_pairs(s, prng);
    const double lambda = 0.2;
    CriticGradients g;
    c.loss(s, pairs, lambda, 1.0, &g);
    auto fd = [&](double& p) {
      const double h = 1e-6, keep = p;
      p = keep + h;
      const double up = c.loss(s, pairs, lambda, 1.0, nullptr).total;
      p = keep - h;
      const double dn = c.loss(s, pairs, lambda, 1.0, nullptr).total;
      p = keep;
      return (up - dn) / (2 * h);
    };
    double diff = 0, na = 0, nf = 0;
    auto acc = [&](double a, double f) {
      diff += (a - f) * (a - f);
      na += a * a;
      nf += f * f;
    };
    for (std::size_t i = 0; i < c.w1.size(); ++i) acc(g.w1[i], fd(c.w1[i]));
    for (std::size_t i = 0; i < c.b1.size(); ++i) acc(g.b1[i], fd(c.b1[i]));
    for (std::size_t i = 0; i < c.w2.size(); ++i) acc(g.w2[i], fd(c.w2[i]));
    acc(g.b2, fd(c.b2));
    const double denom = std::max(std::sqrt(na), std::sqrt(nf));
    if (denom > 0) worst = std::max(worst, std::sqrt(diff) / denom);
  }

  Critic z(CriticConfig{.dim = 64, .hidden = 4});
  const Query q{"z", "Zero margin check?"};
  const Document d{"dz", "Plain text.", 0};
  std::vector<LabeledSample> two = {{z.featurizer().features(q, d, seeds[0]), 1.0, "z", "a"},
                                    {z.featurizer().features(q, d, seeds[1]), 0.0, "z", "b"}};
  const double pair = z.loss(two, {{0, 1, 1.0}}, 0.0, 1.0, nullptr).pair;
  const bool pass = worst <= 1e-4 && pair == std::log(2.0);
  return {pass, "50 instances, worst norm-relative gradient error " + fmt(worst, 3) + " (<= 1e-4); zero-margin pair loss " +
                    fmt(pair, 17) + (pair == std::log(2.0) ? " == ln 2" : " != ln 2")};
}

// ---- 5. critic fidelity ----

Outcome critic_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  Critic c;  // default dimensions
  const auto task = testing::linear_task(c, 32, 16, 60, 0.5, 1);
  train_critic(c, task.train, TrainConfig{});  // default staged schedule
  const double n1 = testing::mean_ndcg(c, task.test, 1);
  const double n5 = testing::mean_ndcg(c, task.test, 5);
  const double dt = seconds_since(t0);
  const bool pass = n1 >= 0.85 && n5 >= 0.95 && dt < 60.0;
  return {pass, "held-out NDCG@1 " + fmt(n1) + " (>= 0.85), NDCG@5 " + fmt(n5) + " (>= 0.95), 16 contexts x 60 strategies, " +
                    fmt(dt, 3) + " s (< 60)"};
}

// ---- 6. sibling identity ----

Outcome sibling_identity() {
  Rng rng(6);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    SiblingGroup g{"p", rng.normal(0, 10), {}};
    for (std::size_t i = 0, n = 1 + rng.uniform(10); i < n; ++i)
      g.children.push_back({"c" + std::to_string(i), rng.normal(0, 10), rng.uniform01() * 5});
    const double alpha = rng.uniform01();
    const auto A = sibling_advantage(g, alpha);
    double lhs = 0, sum_d = 0;
    for (std::size_t i = 0; i < A.size(); ++i) {
      const double d = g.children[i].reward - g.parent_reward;
      lhs += A[i] - (d < 0 ? g.children[i].pnd : 0.0);
      sum_d += d;
    }
    worst = std::max(worst, rel_err(lhs, (1 - alpha) * sum_d));
  }
  const auto ex = sibling_advantage({"p", 0.5, {{"a", 0.7, 0.0}, {"b", 0.6, 0.0}, {"c", 0.4, 0.3}}}, 0.8);
  const double e0 = 0.2 - 0.8 * (0.2 / 3.0), e1 = 0.1 - 0.8 * (0.2 / 3.0), e2 = -0.1 - 0.8 * (0.2 / 3.0) + 0.3;
  const double ex_err = std::max({std::abs(ex[0] - e0), std::abs(ex[1] - e1), std::abs(ex[2] - e2)});
  const bool pass = worst <= 1e-12 && ex_err <= 1e-9;
  return {pass, "identity max rel err " + fmt(worst, 3) + " over 10000 groups; worked example (" + fmt(ex[0], 8) + ", " +
                    fmt(ex[1], 8) + ", " + fmt(ex[2], 8) + "), err " + fmt(ex_err, 3) + " (<= 1e-9)"};
}

// ---- 7. AWR effect ----

Outcome awr_effect() {
  Rng rng(7);
  int contexts = 0, raised = 0;
  for (int trial = 0; trial < 20; ++trial) {
    EvolverPolicy p;
    for (double& w : p.weights) w = rng.normal(0.0, 0.3);
    const Op favoured = all_ops()[rng.uniform(12)];
    std::vector<Experience> batch;
    for (const auto& s : seed_strategies()) {
      const auto mask = applicable_mask(s.genotype, false, SearchSpace::full());
      if (!mask[static_cast<std::size_t>(favoured)]) continue;
      const auto x = EvolverPolicy::features(s.genotype, false);
      for (Op op : all_ops()) {
        if (!mask[static_cast<std::size_t>(op)]) continue;
        batch.push_back({x, mask, op, op == favoured ? 1.0 + rng.uniform01() : rng.normal(-0.5, 0.5)});
      }
    }
    if (batch.empty()) continue;
    std::vector<double> before;
    for (const auto& e : batch)
      if (e.op == favoured) before.push_back(p.probs(e.x, e.mask)[static_cast<std::size_t>(favoured)]);
    awr_update(p, batch, AwrConfig{.beta = 1.0, .lr = 0.05, .epochs = 1});
    std::size_t k = 0;
    for (const auto& e : batch) {
      if (e.op != favoured) continue;
      ++contexts;
      if (p.probs(e.x, e.mask)[static_cast<std::size_t>(favoured)] > before[k++]) ++raised;
    }
  }
  return {contexts > 0 && raised == contexts,
          "favoured operator probability rose at " + std::to_string(raised) + "/" + std::to_string(contexts) +
              " batch contexts over 20 batches"};
}

// ---- 8 and 10. co-evolution runs ----

struct EvolutionResult {
  double seed_baseline = 0.0;
  double evolved = 0.0;
  std::size_t max_ge_calls = 0;
  double seconds = 0.0;
  std::unique_ptr<Coevolution> run;
  std::unique_ptr<SimulatedEngine> engine;
};

EvolutionResult evolve_seed(std::uint64_t seed, int K_top, int K_rand) {
  const auto t0 = std::chrono::steady_clock::now();
  EvolutionResult out;
  RunConfig cfg;  // defaults, T = 100
  cfg.seed = seed;
  cfg.K_top = K_top;
  cfg.K_rand = K_rand;
  const auto data = make_synthetic_dataset({static_cast<std::size_t>(cfg.dataset_size), 5, seed});
  out.engine = std::make_unique<SimulatedEngine>(SimulationParams{.seed = seed});
  StrategyEvaluator ev(*out.engine);
  out.seed_baseline = best_mean_ge_gain(ev, data, seed_strategies());
  out.run = std::make_unique<Coevolution>(cfg, data, *out.engine);
  for (const auto& r : out.run->run()) out.max_ge_calls = std::max(out.max_ge_calls, r.ge_calls);
  std::vector<Strategy> final_pool;
  for (const auto* e : out.run->archive().elites()) final_pool.push_back(e->strategy);
  out.evolved = best_mean_ge_gain(ev, data, final_pool);
  out.seconds = seconds_since(t0);
  return out;
}

template <class F>
auto parallel_seeds(F f) {
  std::vector<std::future<decltype(f(std::uint64_t{1}))>> fs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) fs.push_back(std::async(std::launch::async, f, seed));
  std::vector<decltype(f(std::uint64_t{1}))> out;
  for (auto& x : fs) out.push_back(x.get());
  return out;
}

Outcome coevolution_gain(const std::vector<EvolutionResult>& full) {
  int improved = 0;
  std::string per;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const double ratio = full[i].evolved / full[i].seed_baseline;
    if (full[i].seed_baseline > 0 && ratio >= 1.10) ++improved;
    per += (i ? ", " : "") + fmt(full[i].seed_baseline, 4) + "->" + fmt(full[i].evolved, 4);
  }
  return {improved >= 4, std::to_string(improved) + "/5 seeds improve >= 10% (need 4); seed-baseline->evolved mean GE gain: " + per};
}

Outcome budget(const std::vector<EvolutionResult>& full, const std::vector<EvolutionResult>& half) {
  std::size_t max_calls = 0, max_half = 0;
  double sum_full = 0, sum_half = 0;
  std::string per;
  for (std::size_t i = 0; i < full.size(); ++i) {
    max_calls = std::max(max_calls, full[i].max_ge_calls);
    max_half = std::max(max_half, half[i].max_ge_calls);
    sum_full += full[i].evolved;
    sum_half += half[i].evolved;
    per += (i ? ", " : "") + fmt(half[i].evolved / full[i].evolved, 3);
  }
  const double ratio = sum_half / sum_full;
  const bool pass = max_calls <= 8 && max_half <= 4 && ratio >= 0.9;
  return {pass, "max GE calls/iteration " + std::to_string(max_calls) + " (<= 8), half-budget " + std::to_string(max_half) +
                    " (<= 4); 5-seed mean half/full best reward " + fmt(ratio, 4) + " (>= 0.9); per seed " + per};
}

// ---- 9. regret ----

Outcome regret() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto reps = parallel_seeds([](std::uint64_t seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.critic_dim = 1024;
    cfg.critic_hidden = 32;
    SimulatedEngine eng(SimulationParams{.seed = seed});
    return run_regret(cfg, make_synthetic_dataset({16, 5, seed}), eng, 1600);
  });
  double r100 = 0, r400 = 0, r1600 = 0;
  std::string per;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    r100 += reps[i].regret_at(100) / 5;
    r400 += reps[i].regret_at(400) / 5;
    r1600 += reps[i].regret_at(1600) / 5;
    per += (i ? "; " : "") + fmt(reps[i].regret_at(400) / reps[i].regret_at(100), 3) + "/" +
           fmt(reps[i].regret_at(1600) / reps[i].regret_at(400), 3);
  }
  const double a100 = r100 / 100, a400 = r400 / 400, a1600 = r1600 / 1600;
  const double dt = seconds_since(t0);
  const bool pass = r400 <= 2.5 * r100 && r1600 <= 2.5 * r400 && a400 < a100 && a1600 < a400 && dt < 300.0;
  return {pass, "5-seed mean R(100) " + fmt(r100, 5) + ", R(400) " + fmt(r400, 5) + " (ratio " + fmt(r400 / r100, 3) +
                    " <= 2.5), R(1600) " + fmt(r1600, 5) + " (ratio " + fmt(r1600 / r400, 3) + " <= 2.5); average " +
                    fmt(a100, 4) + " > " + fmt(a400, 4) + " > " + fmt(a1600, 4) + "; per-seed ratios " + per + "; " +
                    fmt(dt, 3) + " s (< 300)"};
}

// ---- 11. planner ----

double target_overall(Engine& e, const Example& x, const std::string& target_text) {
  const auto cands = x.cands.with_target_text(target_text);
  const auto ans = e.synthesize_answer(x.query, cands);
  if (!ok(ans)) throw std::runtime_error("synthesis failed");
  return compute_impressions(std::get<CitedAnswer>(ans), static_cast<int>(x.cands.target_index) + 1).overall;
}

Outcome planner_contracts(const Coevolution& trained) {
  int reuse = 0, too_long = 0, not_worse = 0, constant_ok = 0;
  const auto pool = trained.archive().top_k_by_pnd(25);
  const auto constant = [](const Query&, const Document&, const Strategy&) { return 1.0; };
  for (int i = 0; i < 100; ++i) {
    const auto data = make_synthetic_dataset({1, 5, 5000 + static_cast<std::uint64_t>(i)});
    const Example& x = data.front();
    SimulatedEngine e(SimulationParams{.seed = static_cast<std::uint64_t>(i)});
    const auto r = optimize(x.query, x.target(), trained.archive(), trained.critic(), e);
    std::set<std::string> ids;
    for (const auto& s : r.trace.steps)
      if (!ids.insert(s.strategy_id).second) ++reuse;
    if (r.trace.steps.size() > 3) ++too_long;
    if (target_overall(e, x, r.document.text) >= target_overall(e, x, x.target().text)) ++not_worse;
    const auto c = plan(x.query, x.target(), pool, constant, e, 3);
    if (c.trace.steps.size() == 1 && c.trace.stop == StopReason::marginal_gain) ++constant_ok;
  }
  const bool pass = reuse == 0 && too_long == 0 && constant_ok == 100 && not_worse >= 90;
  return {pass, "100 cases: reuse " + std::to_string(reuse) + ", traces > 3 steps " + std::to_string(too_long) +
                    ", constant critic one-step stops " + std::to_string(constant_ok) + "/100, overall >= baseline " +
                    std::to_string(not_worse) + "/100 (>= 90)"};
}

// ---- 12. CLI determinism ----

std::map<std::string, std::string> tree_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  return out;
}

int run_cli(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Outcome cli_determinism(const std::string& geo) {
  const fs::path root = fs::temp_directory_path() / "geo_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  write_file((root / "run.cfg").string(),
             "T = 4\ndataset_size = 6\nwarmup_contexts = 3\ncritic_dim = 512\ncritic_hidden = 16\n"
             "critic_offline_epochs = 3\n");
  write_file((root / "q.txt").string(), "How should I think about heat pumps and energy bills?\n");
  write_file((root / "d.txt").string(), "Heat pumps move heat instead of burning fuel. They suit many homes.\n");
  const std::string q = "\"" + geo + "\"";
  const std::string base = " --config \"" + (root / "run.cfg").string() + "\" --seed 42";
  int rc = 0;
  for (const char* tag : {"a", "b"}) {
    const auto out = root / (std::string("evolve_") + tag);
    rc |= run_cli(q + base + " --out \"" + out.string() + "\" evolve");
    const auto opt = root / (std::string("optimize_") + tag);
    rc |= run_cli(q + base + " --out \"" + opt.string() + "\" optimize --query \"" + (root / "q.txt").string() +
                  "\" --doc \"" + (root / "d.txt").string() + "\" --archive \"" +
                  (root / "evolve_a" / "archive.jsonl").string() + "\"");
  }
  if (rc != 0) return {false, "CLI exited non-zero"};
  const auto ea = tree_contents(root / "evolve_a"), eb = tree_contents(root / "evolve_b");
  const auto oa = tree_contents(root / "optimize_a"), ob = tree_contents(root / "optimize_b");
  const bool pass = !ea.empty() && !oa.empty() && ea == eb && oa == ob && ea.contains("archive.jsonl") &&
                    oa.contains("plan.json");
  fs::remove_all(root);
  return {pass, "evolve: " + std::to_string(ea.size()) + " files " + (ea == eb ? "identical" : "DIFFER") +
                    "; optimize: " + std::to_string(oa.size()) + " files " + (oa == ob ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-geo-binary>\n";
    return 2;
  }
  const std::string geo = argv[1];
  int failures = 0;
  auto report = [&](int n, const std::string& name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << n << ". " << name << ": " << o.detail << std::endl;
  };

  report(1, "metric oracle", metric_oracle);
  report(2, "sensitivity formula", sensitivity_examples);
  report(3, "archive fuzz", archive_fuzz);
  report(4, "loss correctness", loss_gradients);
  report(5, "critic fidelity", critic_fidelity);
  report(6, "sibling-advantage identity", sibling_identity);
  report(7, "AWR effect", awr_effect);

  std::vector<EvolutionResult> full, half;
  std::string evolve_error;
  try {
    full = parallel_seeds([](std::uint64_t s) { return evolve_seed(s, 4, 4); });
    half = parallel_seeds([](std::uint64_t s) { return evolve_seed(s, 2, 2); });
  } catch (const std::exception& e) {
    evolve_error = e.what();
  }
  auto need_runs = [&](const std::function<Outcome()>& f) {
    return [&, f] { return evolve_error.empty() ? f() : Outcome{false, "evolution failed: " + evolve_error}; };
  };
  report(8, "budget", need_runs([&] { return budget(full, half); }));
  report(9, "regret", regret);
  report(10, "co-evolution gain", need_runs([&] { return coevolution_gain(full); }));
  report(11, "planner contracts", need_runs([&] { return planner_contracts(*full.front().run); }));
  report(12, "determinism", [&] { return cli_determinism(geo); });

  std::cout << (failures == 0 ? "all 12 criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
