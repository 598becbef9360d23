#pragma once

// MAP-Elites strategy archive with a value-novelty admission gate, PND
// (reward + novelty + lineage diversity) scoring, pruning and sampling.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geo/genotype.hpp"
#include "geo/rng.hpp"

namespace geo {

/// Character n-grams packed into integers (exact for n <= 8), sorted, unique.
using NgramSet = std::vector<std::uint64_t>;
NgramSet char_ngrams(std::string_view s, int n);
double jaccard(const NgramSet& a, const NgramSet& b);

/// Jaccard similarity of character n-gram sets; two empty sets give 1.
double ngram_similarity(std::string_view a, std::string_view b, int n = 3);

/// Mean of depth (capped at 5) / 5, distinct operators used / 14, and the
/// fraction of tracked genotype fields that are active.
double diversity(const Strategy& s);

struct PNDComponents {
  double reward = 0.0;
  double novelty = 0.0;
  double diversity = 0.0;
  double pnd = 0.0;
};

inline double pnd_value(double reward, double nov, double div, double lambda_pnd) {
  return reward + lambda_pnd * (nov + div);
}

enum class InsertOutcome { inserted, replaced, rejected_novelty, rejected_value };
std::string_view outcome_name(InsertOutcome o);

struct InsertDecision {
  InsertOutcome outcome = InsertOutcome::rejected_value;
  std::string replaced_id;
  bool admitted() const { return outcome == InsertOutcome::inserted || outcome == InsertOutcome::replaced; }
};

struct ArchiveConfig {
  std::size_t capacity = 35;
  std::size_t cell_capacity = 3;
  double lambda_pnd = 0.3;
  double similarity_threshold = 0.9;
  int ngram = 3;
};

struct Elite {
  Strategy strategy;
  PNDComponents pnd;
  std::uint64_t seq = 0;  // admission order; lower is older
  int observations = 1;   // reward samples averaged into strategy.reward
  NgramSet grams;
};

class Archive {
 public:
  explicit Archive(ArchiveConfig cfg = {});

  const ArchiveConfig& config() const { return cfg_; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::size_t cell_count() const { return cells_.size(); }
  const std::map<Descriptor, std::vector<Elite>>& cells() const { return cells_; }

  /// Elites in cell order, refreshed.
  std::vector<const Elite*> elites() const;
  const Elite* find(const std::string& id) const;

  /// Admits `s` with the given reward under the novelty and value gates.
  /// Throws std::invalid_argument on a non-finite reward or a duplicate id.
  InsertDecision try_insert(Strategy s, double reward, RewardSource source);

  /// Folds a further GE measurement of an archived strategy into its stored
  /// reward as a running mean over its observations. Returns false when `id`
  /// is not archived. Throws std::invalid_argument on a non-finite reward.
  bool observe(const std::string& id, double reward);
  /// The elite whose rendered summary equals `summary`, if any.
  const Elite* find_by_summary(std::string_view summary) const;

  /// Removes lowest-PND strategies until size <= capacity. Elites that are the
  /// only member of their cell are spared while any other choice exists.
  std::vector<std::string> prune();

  /// 1 - max similarity to archived elites other than `s` itself.
  double novelty(const Strategy& s) const;
  PNDComponents pnd_score(const Strategy& s) const;

  /// Uniform over cells, then proportional to shifted PND within the cell,
  /// without replacement.
  std::vector<Strategy> sample_parents(std::size_t n, Rng& rng) const;
  /// Descending PND, ties newer-first.
  std::vector<Strategy> top_k_by_pnd(std::size_t k) const;

  std::string to_jsonl() const;
  static Archive from_jsonl(const std::string& data);
  void save(const std::string& path) const;
  static Archive load(const std::string& path);

 private:
  void refresh() const;
  double novelty_of(const NgramSet& grams, const std::string& exclude_id) const;

  ArchiveConfig cfg_;
  mutable std::map<Descriptor, std::vector<Elite>> cells_;
  mutable bool dirty_ = false;
  std::uint64_t next_seq_ = 0;
};

}  // namespace geo
