#pragma once

// Generative-engine backends (rewrite + cited answer synthesis) and the
// reward computed around them.

#include <atomic>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "geo/chat_client.hpp"
#include "geo/core.hpp"
#include "geo/genotype.hpp"

namespace geo {

/// Answer-synthesis system prompt, verbatim.
extern const char* const kAnswerSynthesisPrompt;

class Engine {
 public:
  virtual ~Engine() = default;
  virtual std::string_view kind() const = 0;

  virtual Result<Document> rewrite(const Document& d, const Strategy& s, const Query& q) = 0;
  virtual Result<CitedAnswer> synthesize_answer(const Query& q, const CandidateSet& cands) = 0;

  std::uint64_t rewrite_calls() const { return rewrite_calls_.load(); }
  std::uint64_t synthesis_calls() const { return synthesis_calls_.load(); }

 protected:
  std::atomic<std::uint64_t> rewrite_calls_{0};
  std::atomic<std::uint64_t> synthesis_calls_{0};
};

struct SimulationParams {
  std::uint64_t seed = 0;
  int sentences_per_answer = 6;
  double keyword_overlap_w = 3.0;
  double statistic_w = 0.5;
  double quote_w = 0.75;
  double citation_marker_w = 0.75;
  int feature_cap = 6;  // counts beyond this add no salience

  void validate() const;
};

struct SalienceFeatures {
  double keyword_overlap = 0.0;  // fraction of query terms present
  int digit_tokens = 0;
  int quote_pairs = 0;
  int source_markers = 0;
};

/// Content terms of a query: lowercased, length >= 3, stopwords removed, deduplicated.
std::vector<std::string> query_terms(std::string_view query);
SalienceFeatures salience_features(const Query& q, const Document& d);

/// Deterministic stand-in for a generative engine. A pure function of its
/// parameters and inputs.
class SimulatedEngine : public Engine {
 public:
  explicit SimulatedEngine(SimulationParams p = {});
  std::string_view kind() const override { return "simulated"; }

  Result<Document> rewrite(const Document& d, const Strategy& s, const Query& q) override;
  Result<CitedAnswer> synthesize_answer(const Query& q, const CandidateSet& cands) override;

  double salience(const Query& q, const Document& d) const;
  const SimulationParams& params() const { return p_; }

 private:
  SimulationParams p_;
};

/// Largest-remainder apportionment of `total` seats by weight; ties go to the
/// lower index. All-zero weights give all-zero seats.
std::vector<int> allocate_sentences(const std::vector<double>& weights, int total);

class RemoteEngine : public Engine {
 public:
  explicit RemoteEngine(RemoteParams p);
  std::string_view kind() const override { return "remote"; }

  Result<Document> rewrite(const Document& d, const Strategy& s, const Query& q) override;
  Result<CitedAnswer> synthesize_answer(const Query& q, const CandidateSet& cands) override;

 private:
  ChatClient client_;
};

struct EngineConfig {
  std::string kind = "simulated";
  SimulationParams simulated;
  RemoteParams remote;
};
std::unique_ptr<Engine> make_engine(const EngineConfig& c);

/// Outcome of one strategy evaluation; `reward` is empty when the strategy
/// could not be evaluated (never reported as 0).
struct Evaluation {
  std::optional<double> reward;
  std::string error;
  Document rewritten;
};

/// reward = overall(target | rewritten set) - overall(target | original set).
/// Baselines are cached per (query, candidate set) with single-flight semantics,
/// so concurrent first access synthesizes once.
class StrategyEvaluator {
 public:
  explicit StrategyEvaluator(Engine& engine) : engine_(engine) {}

  Evaluation evaluate(const Query& q, const Strategy& s, const CandidateSet& cands);
  Result<double> baseline(const Query& q, const CandidateSet& cands);

  Engine& engine() { return engine_; }
  std::size_t baseline_syntheses() const { return baseline_syntheses_.load(); }

 private:
  Engine& engine_;
  std::mutex mu_;
  std::map<std::string, std::shared_future<Result<double>>> cache_;
  std::atomic<std::size_t> baseline_syntheses_{0};
};

std::string candidate_set_key(const Query& q, const CandidateSet& cands);

}  // namespace geo
