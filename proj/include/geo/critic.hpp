#pragma once

// Surrogate critic: hashed n-gram featurization of (strategy summary, query,
// document head) plus the behavioral descriptor, a two-layer tanh value head,
// and the hybrid pairwise + Huber training objective.

#include <cstdint>
#include <string>
#include <vector>

#include "geo/core.hpp"
#include "geo/genotype.hpp"
#include "geo/rng.hpp"

namespace geo {

/// Sparse vector; indices sorted and unique.
struct FeatureVector {
  std::vector<std::uint32_t> idx;
  std::vector<double> val;
};

struct CriticConfig {
  int dim = 4096;  // hashed n-gram buckets
  int hidden = 64;
  int doc_head_tokens = 512;
  double init_scale = 0.5;  // stddev of first-layer weights
  std::uint64_t seed = 7;
};

/// Query and document blocks, reusable across strategies for the same context.
struct ContextFeatures {
  FeatureVector query;
  FeatureVector doc;
};

class Featurizer {
 public:
  explicit Featurizer(const CriticConfig& c) : cfg_(c) {}
  int input_dim() const { return cfg_.dim + kDescriptorOneHotSize; }

  ContextFeatures context(const Query& q, const Document& d) const;
  /// Summary n-grams followed by the descriptor one-hot (offset past `dim`).
  FeatureVector strategy_block(const Strategy& s) const;
  FeatureVector combine(const ContextFeatures& ctx, const FeatureVector& strategy_block) const;
  FeatureVector combine(const ContextFeatures& ctx, const Strategy& s) const;
  FeatureVector features(const Query& q, const Document& d, const Strategy& s) const;

 private:
  FeatureVector hashed_block(std::string_view text, std::uint64_t salt) const;
  CriticConfig cfg_;
};

struct CriticGradients {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;
};

/// Training example: features, target gain, and grouping keys.
struct LabeledSample {
  FeatureVector x;
  double gain = 0.0;
  std::string context_id;
  std::string strategy_id;
};

/// Preference s+ over s- within one context; indices into the sample list.
struct PreferencePair {
  std::size_t plus = 0;
  std::size_t minus = 0;
  double weight = 1.0;
};

inline double pair_weight(int rank_plus, int rank_minus) { return 1.0 / (rank_plus + rank_minus); }

/// Huber loss with threshold delta, and its derivative.
double huber(double e, double delta = 1.0);
double huber_grad(double e, double delta = 1.0);

struct LossParts {
  double pair = 0.0;
  double reg = 0.0;
  double total = 0.0;
};

/// Adam moments, kept with the model so online calibration continues one
/// optimizer across iterations (and across a resumed run).
struct AdamState {
  std::vector<double> m, v;
  std::uint64_t t = 0;
  bool operator==(const AdamState&) const = default;
};

class Critic {
 public:
  explicit Critic(CriticConfig c = {});

  const CriticConfig& config() const { return cfg_; }
  const Featurizer& featurizer() const { return feat_; }
  int input_dim() const { return feat_.input_dim(); }

  double score(const FeatureVector& x) const;
  double score(const Query& q, const Document& d, const Strategy& s) const;

  /// L = mean_pairs w * log(1 + exp(-(C+ - C-))) + lambda * mean_samples Huber(C - gain).
  /// Fills `grad` when non-null. Throws std::invalid_argument on an empty batch.
  LossParts loss(const std::vector<LabeledSample>& samples, const std::vector<PreferencePair>& pairs,
                 double lambda, double delta, CriticGradients* grad) const;

  // parameters, row-major w1[h * input_dim + i]
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;
  std::uint64_t steps = 0;
  AdamState adam;

  void save(const std::string& path) const;
  static Critic load(const std::string& path);
  bool operator==(const Critic& o) const;

 private:
  CriticConfig cfg_;
  Featurizer feat_;
};

/// Ranks samples within each context by descending gain (ties by strategy id)
/// and emits all strictly ordered pairs among the top `dense_top`, plus
/// `n_contrastive` random top-3 vs bottom-3 pairs per context.
std::vector<PreferencePair> build_pairs(const std::vector<LabeledSample>& samples, Rng& rng,
                                        int dense_top = 5, int n_contrastive = 3);

struct TrainConfig {
  double lambda = 0.2;
  double huber_delta = 1.0;
  int epochs = 30;
  int freeze_epochs = 1;  // epochs updating only the output layer
  double lr = 1e-3;
  int batch_contexts = 2;
  int dense_top = 5;
  int n_contrastive = 3;
  std::uint64_t seed = 11;
};

struct EpochReport {
  int epoch = 0;
  int stage = 0;  // 1 = frozen first layer, 2 = full head
  double loss = 0.0;
  double pair_loss = 0.0;
  double reg_loss = 0.0;
};

struct TrainReport {
  std::vector<EpochReport> epochs;
  double initial_loss = 0.0;
  std::size_t samples = 0;
  std::size_t pairs = 0;
};

/// Staged mini-batch Adam over context batches. Throws std::runtime_error with
/// diagnostics if the loss becomes non-finite.
TrainReport train_critic(Critic& c, const std::vector<LabeledSample>& samples, const TrainConfig& cfg);

/// Online recalibration on GE-labeled entries: full-head training for
/// `cfg.epochs` epochs (no freeze stage). Empty input leaves the model unchanged.
TrainReport calibrate_online(Critic& c, const std::vector<LabeledSample>& samples, TrainConfig cfg);

/// Fraction of strictly ordered within-context pairs the critic orders correctly.
double pairwise_accuracy(const Critic& c, const std::vector<LabeledSample>& samples);

/// DCG with relevance = gain and discount 1/log2(i+1), normalized by the ideal
/// DCG; returns 1 when the ideal DCG is 0.
double ndcg_at_k(const std::vector<std::size_t>& predicted_order, const std::vector<double>& gains, int k);

double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace geo
