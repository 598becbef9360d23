#pragma once

// Candidate generation for the strategy archive: a softmax policy over the
// operator catalog trained by advantage-weighted regression, uniform symbolic
// perturbations, and an optional remote LLM proposer.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geo/chat_client.hpp"
#include "geo/core.hpp"
#include "geo/genotype.hpp"
#include "geo/rng.hpp"

namespace geo {

using OpMask = std::array<bool, kOpCount>;

OpMask applicable_mask(const Genotype& parent, bool has_b, const SearchSpace& space);

/// Linear softmax policy pi(op | features) over the 14 operators.
class EvolverPolicy {
 public:
  /// Parent descriptor one-hot, has-second-parent flag, bias.
  static constexpr int kFeatureDim = kDescriptorOneHotSize + 2;

  explicit EvolverPolicy(double temperature = 1.0);

  static std::vector<double> features(const Genotype& parent, bool has_b);
  /// Probabilities restricted to the mask (masked operators get 0). Throws
  /// std::invalid_argument if the mask is empty.
  std::array<double, kOpCount> probs(const std::vector<double>& x, const OpMask& mask) const;
  Op sample(const std::vector<double>& x, const OpMask& mask, Rng& rng) const;

  std::vector<double> weights;  // row-major [op][feature]
  double temperature = 1.0;

  nlohmann::json to_json() const;
  static EvolverPolicy from_json(const nlohmann::json& j);
  bool operator==(const EvolverPolicy&) const = default;
};

struct Experience {
  std::vector<double> x;
  OpMask mask{};
  Op op = Op::mut_C_strengthen;
  double advantage = 0.0;
};

struct SiblingChild {
  std::string strategy_id;
  double reward = 0.0;
  double pnd = 0.0;
};

struct SiblingGroup {
  std::string parent_id;
  double parent_reward = 0.0;
  std::vector<SiblingChild> children;
};

/// A_i = d_i - alpha * mean_j(d_j) + [d_i < 0] * pnd_i with d_i = r_i - r_parent;
/// the mean includes child i. Throws std::invalid_argument on an empty group.
std::vector<double> sibling_advantage(const SiblingGroup& g, double alpha_sib);

inline constexpr double kAwrWeightClip = 20.0;
/// min(exp(A / beta), 20).
double awr_weight(double advantage, double beta);

struct AwrConfig {
  double beta = 1.0;
  double lr = 0.05;
  int epochs = 2;
};

struct AwrReport {
  double loss_before = 0.0;
  double loss_after = 0.0;
  std::size_t experiences = 0;
};

/// Gradient steps on -(1/N) sum_i w_i log pi(op_i | x_i). Throws
/// std::runtime_error on a non-finite loss or weight.
AwrReport awr_update(EvolverPolicy& policy, const std::vector<Experience>& batch, const AwrConfig& cfg);

struct Candidate {
  Strategy strategy;
  Op op = Op::mut_C_strengthen;
  std::string parent_id;
  std::vector<double> x;  // policy features at proposal time
  OpMask mask{};
  bool from_policy = false;
};

struct ProposalCounts {
  int n_evolver = 8;
  int n_ops = 8;
};

using IdGenerator = std::function<std::string()>;

/// Policy-sampled children (n_evolver) and uniformly perturbed children
/// (n_ops), cycling through the parents. Crossovers pair a parent with the
/// next one in the list; with a single parent cx_* operators are masked out.
/// Children repeating a parent's or an earlier child's summary are dropped.
std::vector<Candidate> propose_candidates(const EvolverPolicy& policy, const std::vector<Strategy>& parents,
                                          const ProposalCounts& counts, Rng& rng, const SearchSpace& space,
                                          const IdGenerator& next_id);

extern const char* const kEvolverSystemPrompt;

struct RemoteAction {
  Op op = Op::mut_C_strengthen;
  Genotype child;
};

struct RemoteProposal {
  std::vector<RemoteAction> actions;
  int invalid = 0;             // malformed JSON, unknown operator or genotype
  int rejected_crossover = 0;  // cx_* without a second parent
  std::string error;           // transport failure
  bool empty() const { return actions.empty(); }
};

/// Fills the proposal template (query, document summary, parents, catalog).
std::string evolver_user_prompt(const Query& q, std::string_view content_summary, const Genotype& a,
                                const Genotype* b, int n);

/// Parses one JSON object per line into actions.
RemoteProposal parse_remote_actions(std::string_view reply, bool has_b);

RemoteProposal remote_propose(const ChatClient& client, const Query& q, const Document& d, const Genotype& a,
                              const Genotype* b, int n);

}  // namespace geo
