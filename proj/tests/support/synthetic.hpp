#pragma once

// Synthetic ranking data for critic tests: a fixed pool of strategies whose
// gain is a linear function of their descriptor plus a per-context offset and
// Gaussian noise, so the within-context order is realizable from features.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "geo/critic.hpp"
#include "geo/dataset.hpp"

namespace geo::testing {

/// Distinct strategies reached by random operator chains from the seeds.
inline std::vector<Strategy> strategy_pool(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Strategy> pool = seed_strategies();
  std::set<std::string> seen;
  for (const auto& s : pool) seen.insert(s.summary);
  int guard = 0;
  while (pool.size() < n && ++guard < 100000) {
    Genotype g = pool[rng.uniform(pool.size())].genotype;
    const Op op = all_ops()[rng.uniform(12)];
    if (!is_applicable(op, g, false, SearchSpace::full())) continue;
    g = apply_operator(op, g, nullptr, rng);
    auto s = make_strategy("p" + std::to_string(pool.size()), g);
    if (seen.insert(s.summary).second) pool.push_back(s);
  }
  return pool;
}

struct LinearTask {
  std::vector<LabeledSample> train, test;
  std::vector<double> theta;  // weight per descriptor one-hot slot
};

/// Gains are shifted per context so the smallest is 0.
inline LinearTask linear_task(const Critic& critic, std::size_t n_train, std::size_t n_test,
                              std::size_t n_strategies, double noise, std::uint64_t seed) {
  LinearTask t;
  Rng rng(seed);
  t.theta.resize(kDescriptorOneHotSize);
  for (double& w : t.theta) w = rng.normal(0.0, 1.0);
  const auto pool = strategy_pool(n_strategies, seed ^ 0x9e37);
  const auto data = make_synthetic_dataset({n_train + n_test, 5, seed});
  for (std::size_t c = 0; c < data.size(); ++c) {
    const auto& x = data[c];
    const auto ctx = critic.featurizer().context(x.query, x.target());
    const double offset = rng.normal(0.0, 2.0);
    std::vector<LabeledSample> group;
    double lo = 1e300;
    for (const auto& s : pool) {
      const auto d = descriptor(s.genotype);
      double g = offset + noise * rng.normal();
      int base = 0;
      for (std::size_t a = 0; a < d.size(); ++a) {
        g += t.theta[static_cast<std::size_t>(base + d[a])];
        base += kDescriptorCardinality[a];
      }
      lo = std::min(lo, g);
      group.push_back({critic.featurizer().combine(ctx, s), g, x.context_id(), s.id});
    }
    for (auto& l : group) {
      l.gain -= lo;
      (c < n_train ? t.train : t.test).push_back(std::move(l));
    }
  }
  return t;
}

/// Mean NDCG@k over the contexts of `samples`, ordering by critic score.
inline double mean_ndcg(const Critic& critic, const std::vector<LabeledSample>& samples, int k) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) groups[samples[i].context_id].push_back(i);
  double total = 0.0;
  for (const auto& [id, idx] : groups) {
    std::vector<double> gains, scores;
    for (auto i : idx) {
      gains.push_back(samples[i].gain);
      scores.push_back(critic.score(samples[i].x));
    }
    std::vector<std::size_t> order(idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    total += ndcg_at_k(order, gains, k);
  }
  return total / static_cast<double>(groups.size());
}

}  // namespace geo::testing
