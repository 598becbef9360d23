#pragma once

// Structured rewriting strategies: the five gene blocks (instruction,
// constraints, reasoning, format, tone) plus length policy, their critic and
// engine renderings, the 12-axis behavioral descriptor, and the operator catalog.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "geo/rng.hpp"

namespace geo {

enum class Intent {
  none,
  keyword_stuffing,
  unique_words,
  easy_to_understand,
  authoritative,
  technical_words,
  fluency,
  cite_sources,
  quotation,
  statistics,
};
inline constexpr int kIntentCount = 10;

enum class Strength { soft, normal, strict };
enum class Schema { prose, bullets, sections, qa };
enum class Tone { neutral, assertive, simple, technical, formal };
enum class Technicality { low, mid, high };
enum class LengthPolicy { keep, shorten, expand };

/// What a library clause or step asks the rewriter to add. The simulated
/// engine keys its transforms on these.
enum class Lever { none, statistic, source, quote, keyword, shorten };

struct LibraryEntry {
  std::string_view key;
  std::string_view text;
  Lever lever = Lever::none;
};

const std::vector<LibraryEntry>& clause_library();
const std::vector<LibraryEntry>& step_library();
/// Index into the library, or -1.
int clause_index(std::string_view key);
int step_index(std::string_view key);

inline constexpr std::size_t kMaxClauses = 8;
inline constexpr std::size_t kMaxSteps = 8;

struct Genotype {
  // g^I
  Intent intent = Intent::none;
  std::string instruction;
  // g^C; clause indices into clause_library(), kept sorted
  std::vector<int> clauses;
  Strength strength = Strength::soft;
  LengthPolicy length = LengthPolicy::keep;
  // g^R; step indices into step_library(), in insertion order
  std::vector<int> steps;
  bool self_check = false;
  bool conflict_resolution = false;
  bool post_check = false;
  // g^F
  Schema schema = Schema::prose;
  bool use_code_block = false;
  bool has_prelude = false;
  // g^T
  Tone tone = Tone::neutral;
  Technicality technicality = Technicality::mid;

  bool operator==(const Genotype&) const = default;
};

/// Task text for an intent tag (the seed task for the nine seed intents).
std::string_view intent_instruction(Intent i);
std::string_view intent_name(Intent i);

/// JSON labels of the categorical fields.
std::string_view label(Strength v);
std::string_view label(Schema v);
std::string_view label(Tone v);
std::string_view label(Technicality v);
std::string_view label(LengthPolicy v);

/// Throws std::invalid_argument naming the violated invariant.
void validate(const Genotype& g);

/// Critic rendering: "Name:Value" pairs of non-default categorical fields
/// joined by '|', or "Default".
std::string render_summary(const Genotype& g);

/// Engine rendering: the meta-prompt given to the rewriter.
std::string render_prompt(const Genotype& g);

using Descriptor = std::array<int, 12>;
/// Cardinality of each descriptor axis.
inline constexpr std::array<int, 12> kDescriptorCardinality = {10, 4, 2, 2, 2, 2, 2, 2, 5, 3, 3, 4};
inline constexpr int kDescriptorOneHotSize = 41;

Descriptor descriptor(const Genotype& g);
int steps_bucket(std::size_t n_steps);
std::string descriptor_key(const Descriptor& d);

/// Number of the 12 tracked fields that differ from their defaults.
int active_field_count(const Genotype& g);
inline constexpr int kTrackedFieldCount = 12;

nlohmann::json to_json(const Genotype& g);
/// Throws std::invalid_argument on unknown labels, library keys or structure.
Genotype genotype_from_json(const nlohmann::json& j);

// ---- operators ----

enum class Op {
  mut_C_strengthen,
  mut_C_relax,
  mut_T_toggle_tone,
  mut_T_technicality,
  mut_F_schema_swap,
  mut_F_toggle_code_block,
  mut_F_toggle_prelude,
  mut_R_add_step,
  mut_R_remove_step,
  mut_R_toggle_self_check,
  mut_I_refocus,
  mut_L_length_policy,
  cx_swap_gene,
  cx_conflict_synthesis,
};
inline constexpr int kOpCount = 14;

std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);
int op_arity(Op op);
const std::array<Op, kOpCount>& all_ops();

/// The part of genotype space the operators may move into. The full space is
/// the default; the regret harness narrows it to a finite universe.
struct SearchSpace {
  std::vector<int> clause_pool;
  std::vector<int> step_pool;
  std::vector<Intent> intents;
  Strength min_strength = Strength::soft;
  Strength max_strength = Strength::strict;
  std::vector<LengthPolicy> length_cycle;
  std::vector<Op> operators;

  static SearchSpace full();
  bool allows(Op op) const;
};

/// True when `op` is in the space and would change `a` (for mutations) or has
/// its second parent (for crossovers).
bool is_applicable(Op op, const Genotype& a, bool has_b, const SearchSpace& space);

/// Throws std::invalid_argument for a cx_* operator without `b`, or a mutation
/// that is not applicable.
Genotype apply_operator(Op op, const Genotype& a, const Genotype* b, Rng& rng,
                        const SearchSpace& space);
Genotype apply_operator(Op op, const Genotype& a, const Genotype* b, Rng& rng);

/// Human-readable catalog with vocabularies, used in evolver prompts.
std::string operator_catalog_text();

// ---- strategies ----

enum class RewardSource { ge, critic };
std::string_view source_name(RewardSource s);

struct Lineage {
  std::vector<std::string> parents;
  int depth = 0;
  std::vector<Op> ops;  // operator history, oldest first

  bool operator==(const Lineage&) const = default;
};

struct Strategy {
  std::string id;
  Genotype genotype;
  std::string summary;
  Lineage lineage;
  double reward = 0.0;
  RewardSource source = RewardSource::critic;

  bool operator==(const Strategy&) const = default;
};

Strategy make_strategy(std::string id, Genotype g, Lineage lineage = {});

/// The nine seed strategies, in the conventional order.
std::vector<Strategy> seed_strategies();
/// Intent none, nothing active: the rewriter leaves the document unchanged.
Genotype noop_genotype();

nlohmann::json to_json(const Strategy& s);
Strategy strategy_from_json(const nlohmann::json& j);

}  // namespace geo
