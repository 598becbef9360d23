#include "geo/genotype.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "geo/text.hpp"

namespace geo {

// ---- libraries ----

const std::vector<LibraryEntry>& clause_library() {
  static const std::vector<LibraryEntry> lib = {
      // seed clauses, three per seed task
      {"PreserveCoreInfo", "Do not change, add, or remove any core information."},
      {"KeepStructure", "Keep the original structure (paragraphing, bullet points, line breaks)."},
      {"InlineKeywords", "Insert keywords naturally inline (no keyword list at the end)."},
      {"PreserveMeaning", "Preserve the original meaning and all core information."},
      {"NoNewClaims", "Do not add new claims or remove any content."},
      {"KeepLengthStructure", "Keep the length and structure roughly the same."},
      {"NoOmission", "Do not omit, add, or alter any core information."},
      {"KeepStructureLength", "Keep the original structure and roughly the same length."},
      {"RephraseOnly", "Only rephrase sentences for clarity and readability."},
      {"NoNewFacts", "Do not add new facts or remove any information."},
      {"KeepFormatting", "Keep the original structure (formatting, bullets, spacing)."},
      {"NoExaggeration",
       "Strengthen tone via wording choices, not by exaggerating or making unverifiable claims."},
      {"PreserveNoClaims", "Preserve all core information; do not introduce new claims."},
      {"StructureUnchanged", "Keep the structure and length roughly unchanged."},
      {"TechnicalPhrasing", "Rephrase sentences to sound more technical and precise."},
      {"CoreContentFixed", "Do not alter the core content."},
      {"SmoothTransitions", "Improve sentence transitions and readability."},
      {"StructureLengthSame", "Keep the structure and length roughly the same."},
      {"VerifiableCitations", "Citations must be plausible and verifiable; do not fabricate sources."},
      {"NoCoreChangeNoClaims", "Do not change the core information or add new claims."},
      {"CitationBudget",
       "Keep structure and length roughly the same (about 5-6 citations total)."},
      {"AttributableQuotes", "Quotes must be accurate and attributable; do not invent quotes."},
      {"CoreSimilarLength", "Do not change core content; keep structure and length similar."},
      {"InlineQuotes", "Integrate quotes inline without adding long new paragraphs."},
      {"VerifiableStatistics", "Statistics must be verifiable; do not invent numbers."},
      {"StatsInlineOnly", "Do not modify core content beyond inserting stats inline."},
      {"StopAtSourceEnd", "Keep the original structure and stop at the end of the original source."},
      // evolution-only clauses
      {"AntiHallucination", "Do not state anything the source does not support."},
      {"FactConsistency", "Keep every number, name, and date consistent with the source."},
      {"WordBudget", "Stay within 10% of the original word count."},
      {"ConcreteFigures", "Anchor key claims with a concrete figure or percentage.", Lever::statistic},
      {"NamedSources", "Attribute key claims to a named, credible source.", Lever::source},
      {"ReputableQuote", "Include a short quotation from a reputable expert or organization.",
       Lever::quote},
      {"QueryTerms", "Use the exact terms of the user question where they fit naturally.",
       Lever::keyword},
      {"Concise", "Cut redundant sentences so the text is more concise.", Lever::shorten},
      {"CitationCheck", "Check that every added citation points to a real, relevant source."},
  };
  return lib;
}

const std::vector<LibraryEntry>& step_library() {
  static const std::vector<LibraryEntry> lib = {
      {"PlanEdits", "Identify which sentences carry the answer to the question before editing."},
      {"KeyTerms", "List the key terms of the question and make sure each appears in the text.",
       Lever::keyword},
      {"SelfCorrect", "Re-read the draft and correct any errors you introduced."},
      {"ResolveConflicts", "Where instructions conflict, favor accuracy over style."},
      {"VerifyLogic", "Check that each sentence follows from the one before it."},
      {"FinalCheck", "Confirm the output follows every constraint above."},
      {"EvidenceFirst", "Lead each paragraph with its strongest piece of evidence."},
      {"AudienceFit", "Adjust vocabulary to the likely reader of the question."},
      {"GroundFacts", "Tie each factual statement to the part of the source that supports it."},
  };
  return lib;
}

namespace {

int find_key(const std::vector<LibraryEntry>& lib, std::string_view key) {
  for (std::size_t i = 0; i < lib.size(); ++i) {
    if (lib[i].key == key || lib[i].text == key) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

int clause_index(std::string_view key) { return find_key(clause_library(), key); }
int step_index(std::string_view key) { return find_key(step_library(), key); }

// ---- labels ----

namespace {

struct IntentInfo {
  std::string_view label;    // json label
  std::string_view display;  // summary value
  std::string_view task;
};

const std::array<IntentInfo, kIntentCount>& intent_table() {
  static const std::array<IntentInfo, kIntentCount> t = {{
      {"none", "None", "Rewrite the source while preserving its content."},
      {"keyword_stuffing", "KeywordStuffing",
       "Improve the source by inserting up to 10 NEW, relevant SEO keywords that are NOT already "
       "present in the text."},
      {"unique_words", "UniqueWords",
       "Revise the source by using more unique and precise vocabulary."},
      {"easy_to_understand", "EasyToUnderstand",
       "Rewrite the source in simple, easy-to-understand language."},
      {"authoritative", "Authoritative",
       "Make the source sound confident, authoritative, and expert."},
      {"technical_words", "TechnicalWords",
       "Rewrite the source in a more technical style using domain-appropriate terminology."},
      {"fluency", "Fluency", "Rewrite the source to improve fluency and coherence."},
      {"cite_sources", "CiteSources",
       "Strengthen credibility by adding a small number of natural-language citations to credible "
       "sources (e.g., industry reports, standards, official docs)."},
      {"quotation", "Quotation",
       "Increase perceived authority by adding a few short, relevant quotations from reputable "
       "entities (e.g., well-known organizations or experts)."},
      {"statistics", "Statistics",
       "Add a few concise, relevant statistics or numerical facts to improve concreteness."},
  }};
  return t;
}

constexpr std::array<std::string_view, 3> kStrengthLabels = {"soft", "normal", "strict"};
constexpr std::array<std::string_view, 4> kSchemaLabels = {"prose", "bullets", "sections", "qa"};
constexpr std::array<std::string_view, 5> kToneLabels = {"neutral", "assertive", "simple",
                                                         "technical", "formal"};
constexpr std::array<std::string_view, 3> kTechLabels = {"low", "mid", "high"};
constexpr std::array<std::string_view, 3> kLengthLabels = {"keep", "shorten", "expand"};

constexpr std::array<std::string_view, 3> kStrengthDisplay = {"Soft", "Normal", "Strict"};
constexpr std::array<std::string_view, 4> kSchemaDisplay = {"Prose", "Bullets", "Sections", "QA"};
constexpr std::array<std::string_view, 5> kToneDisplay = {"Neutral", "Assertive", "Simple",
                                                          "Technical", "Formal"};
constexpr std::array<std::string_view, 3> kTechDisplay = {"Low", "Mid", "High"};
constexpr std::array<std::string_view, 3> kLengthDisplay = {"Keep", "Shorten", "Expand"};

template <class E, std::size_t N>
std::string_view label_of(E e, const std::array<std::string_view, N>& labels) {
  return labels.at(static_cast<std::size_t>(e));
}

template <class E, std::size_t N>
E parse_label(const std::string& s, const std::array<std::string_view, N>& labels,
              std::string_view field) {
  for (std::size_t i = 0; i < N; ++i) {
    if (labels[i] == s) return static_cast<E>(i);
  }
  throw std::invalid_argument("unknown " + std::string(field) + " label '" + s + "'");
}

template <class E>
int idx(E e) {
  return static_cast<int>(e);
}

}  // namespace

std::string_view intent_instruction(Intent i) { return intent_table().at(idx(i)).task; }
std::string_view intent_name(Intent i) { return intent_table().at(idx(i)).label; }

std::string_view label(Strength v) { return label_of(v, kStrengthLabels); }
std::string_view label(Schema v) { return label_of(v, kSchemaLabels); }
std::string_view label(Tone v) { return label_of(v, kToneLabels); }
std::string_view label(Technicality v) { return label_of(v, kTechLabels); }
std::string_view label(LengthPolicy v) { return label_of(v, kLengthLabels); }

void validate(const Genotype& g) {
  if (text::trim(g.instruction).empty()) throw std::invalid_argument("genotype instruction is empty");
  if (g.clauses.size() > kMaxClauses) throw std::invalid_argument("too many constraint clauses");
  if (g.steps.size() > kMaxSteps) throw std::invalid_argument("too many reasoning steps");
  const int nc = static_cast<int>(clause_library().size());
  for (std::size_t i = 0; i < g.clauses.size(); ++i) {
    if (g.clauses[i] < 0 || g.clauses[i] >= nc) throw std::invalid_argument("clause outside library");
    if (i > 0 && g.clauses[i] <= g.clauses[i - 1]) {
      throw std::invalid_argument("clauses not in canonical order or duplicated");
    }
  }
  const int ns = static_cast<int>(step_library().size());
  for (std::size_t i = 0; i < g.steps.size(); ++i) {
    if (g.steps[i] < 0 || g.steps[i] >= ns) throw std::invalid_argument("step outside library");
    if (std::count(g.steps.begin(), g.steps.end(), g.steps[i]) > 1) {
      throw std::invalid_argument("duplicated reasoning step");
    }
  }
  if (idx(g.intent) < 0 || idx(g.intent) >= kIntentCount) throw std::invalid_argument("bad intent");
}

// ---- renderings ----

std::string render_summary(const Genotype& g) {
  std::vector<std::string> parts;
  auto add = [&](std::string_view name, std::string_view value) {
    parts.push_back(std::string(name) + ":" + std::string(value));
  };
  if (g.intent != Intent::none) add("Intent", intent_table()[idx(g.intent)].display);
  if (g.tone != Tone::neutral) add("Tone", label_of(g.tone, kToneDisplay));
  if (g.technicality != Technicality::mid) add("Tech", label_of(g.technicality, kTechDisplay));
  if (g.schema != Schema::prose) add("Format", label_of(g.schema, kSchemaDisplay));
  if (g.use_code_block) add("CodeBlock", "On");
  if (g.has_prelude) add("Prelude", "On");
  if (g.strength != Strength::soft) add("Constraint", label_of(g.strength, kStrengthDisplay));
  for (int c : g.clauses) add("Clause", clause_library()[c].key);
  for (int s : g.steps) add("Step", step_library()[s].key);
  if (g.self_check) add("SelfCheck", "On");
  if (g.conflict_resolution) add("ConflictRes", "On");
  if (g.post_check) add("PostCheck", "On");
  if (g.length != LengthPolicy::keep) add("Length", label_of(g.length, kLengthDisplay));
  if (parts.empty()) return "Default";
  return text::join(parts, "|");
}

std::string render_prompt(const Genotype& g) {
  std::ostringstream out;
  out << "You are rewriting a source document so that a generative search engine is more likely "
         "to cite it in its answer to the user question.\n";
  out << "Strategy type: " << intent_name(g.intent) << ".\n";
  out << "Constraint strictness: " << label_of(g.strength, kStrengthLabels) << ".\n\n";

  out << "Task: " << g.instruction << "\n";

  if (!g.clauses.empty()) {
    out << "\nAdhere to the following constraints:\n";
    for (int c : g.clauses) out << "- " << clause_library()[c].text << "\n";
  }
  switch (g.length) {
    case LengthPolicy::keep: out << "\nLength: keep roughly the original length.\n"; break;
    case LengthPolicy::shorten: out << "\nLength: make the text shorter than the original.\n"; break;
    case LengthPolicy::expand: out << "\nLength: expand the text with relevant detail.\n"; break;
  }

  if (!g.steps.empty() || g.self_check || g.conflict_resolution || g.post_check) {
    out << "\nWork through these steps before writing:\n";
    for (std::size_t i = 0; i < g.steps.size(); ++i) {
      out << i + 1 << ". " << step_library()[g.steps[i]].text << "\n";
    }
    if (g.self_check) out << "Check your draft for mistakes before finalizing it.\n";
    if (g.conflict_resolution) out << "If two instructions conflict, state which one you follow.\n";
    if (g.post_check) out << "After writing, verify the output against every constraint.\n";
  }

  out << "\nOutput format: ";
  switch (g.schema) {
    case Schema::prose: out << "plain prose paragraphs."; break;
    case Schema::bullets: out << "bullet points."; break;
    case Schema::sections: out << "short titled sections."; break;
    case Schema::qa: out << "question-and-answer pairs."; break;
  }
  if (g.has_prelude) out << " Begin with a one-sentence summary.";
  if (g.use_code_block) out << " Wrap the output in a code block.";
  out << "\n";
  out << "Tone: " << label_of(g.tone, kToneLabels)
      << "; technicality: " << label_of(g.technicality, kTechLabels) << ".\n\n";
  out << "Output: The revised source text only.\n";
  return out.str();
}

int steps_bucket(std::size_t n) {
  if (n == 0) return 0;
  if (n <= 2) return 1;
  if (n <= 5) return 2;
  return 3;
}

Descriptor descriptor(const Genotype& g) {
  return {idx(g.intent),
          idx(g.schema),
          g.self_check ? 1 : 0,
          g.steps.empty() ? 0 : 1,
          g.conflict_resolution ? 1 : 0,
          g.use_code_block ? 1 : 0,
          g.has_prelude ? 1 : 0,
          g.post_check ? 1 : 0,
          idx(g.tone),
          idx(g.strength),
          idx(g.length),
          steps_bucket(g.steps.size())};
}

std::string descriptor_key(const Descriptor& d) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i > 0) out.push_back('.');
    out += std::to_string(d[i]);
  }
  return out;
}

int active_field_count(const Genotype& g) {
  return (g.intent != Intent::none) + !g.clauses.empty() + (g.strength != Strength::soft) +
         !g.steps.empty() + g.self_check + g.conflict_resolution + g.post_check +
         (g.schema != Schema::prose) + g.use_code_block + g.has_prelude +
         (g.tone != Tone::neutral || g.technicality != Technicality::mid) +
         (g.length != LengthPolicy::keep);
}

// ---- json ----

nlohmann::json to_json(const Genotype& g) {
  nlohmann::json clauses = nlohmann::json::array();
  for (int c : g.clauses) clauses.push_back(std::string(clause_library()[c].key));
  nlohmann::json steps = nlohmann::json::array();
  for (int s : g.steps) steps.push_back(std::string(step_library()[s].key));
  return {
      {"I", {{"intent", std::string(intent_name(g.intent))}, {"text", g.instruction}}},
      {"C",
       {{"clauses", clauses},
        {"strength", std::string(label_of(g.strength, kStrengthLabels))},
        {"length_policy", std::string(label_of(g.length, kLengthLabels))}}},
      {"R",
       {{"steps", steps},
        {"self_check", g.self_check},
        {"conflict_resolution", g.conflict_resolution},
        {"post_check", g.post_check}}},
      {"F",
       {{"output_schema", std::string(label_of(g.schema, kSchemaLabels))},
        {"use_code_block", g.use_code_block},
        {"has_prelude", g.has_prelude}}},
      {"T",
       {{"tone", std::string(label_of(g.tone, kToneLabels))},
        {"technicality", std::string(label_of(g.technicality, kTechLabels))}}},
  };
}

namespace {

const nlohmann::json& block(const nlohmann::json& j, const char* name) {
  static const nlohmann::json empty = nlohmann::json::object();
  auto it = j.find(name);
  if (it == j.end()) return empty;
  if (!it->is_object()) throw std::invalid_argument(std::string("gene block ") + name + " is not an object");
  return *it;
}

template <class T>
T field(const nlohmann::json& b, const char* name, T fallback) {
  auto it = b.find(name);
  if (it == b.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("field ") + name + " has the wrong type");
  }
}

}  // namespace

Genotype genotype_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("genotype must be a JSON object");
  Genotype g;
  const auto& bi = block(j, "I");
  const auto intent_label = field<std::string>(bi, "intent", "none");
  bool found = false;
  for (int i = 0; i < kIntentCount; ++i) {
    if (intent_table()[i].label == intent_label) {
      g.intent = static_cast<Intent>(i);
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("unknown intent label '" + intent_label + "'");
  g.instruction = field<std::string>(bi, "text", std::string(intent_instruction(g.intent)));

  const auto& bc = block(j, "C");
  for (const auto& k : field<std::vector<std::string>>(bc, "clauses", {})) {
    int c = clause_index(k);
    if (c < 0) throw std::invalid_argument("unknown constraint clause '" + k + "'");
    if (std::find(g.clauses.begin(), g.clauses.end(), c) == g.clauses.end()) g.clauses.push_back(c);
  }
  std::sort(g.clauses.begin(), g.clauses.end());
  g.strength = parse_label<Strength>(field<std::string>(bc, "strength", "soft"), kStrengthLabels, "strength");
  g.length = parse_label<LengthPolicy>(field<std::string>(bc, "length_policy", "keep"), kLengthLabels,
                                       "length_policy");

  const auto& br = block(j, "R");
  for (const auto& k : field<std::vector<std::string>>(br, "steps", {})) {
    int s = step_index(k);
    if (s < 0) throw std::invalid_argument("unknown reasoning step '" + k + "'");
    if (std::find(g.steps.begin(), g.steps.end(), s) == g.steps.end()) g.steps.push_back(s);
  }
  g.self_check = field<bool>(br, "self_check", false);
  g.conflict_resolution = field<bool>(br, "conflict_resolution", false);
  g.post_check = field<bool>(br, "post_check", false);

  const auto& bf = block(j, "F");
  g.schema = parse_label<Schema>(field<std::string>(bf, "output_schema", "prose"), kSchemaLabels,
                                 "output_schema");
  g.use_code_block = field<bool>(bf, "use_code_block", false);
  g.has_prelude = field<bool>(bf, "has_prelude", false);

  const auto& bt = block(j, "T");
  g.tone = parse_label<Tone>(field<std::string>(bt, "tone", "neutral"), kToneLabels, "tone");
  g.technicality = parse_label<Technicality>(field<std::string>(bt, "technicality", "mid"),
                                             kTechLabels, "technicality");
  validate(g);
  return g;
}

// ---- operators ----

namespace {

constexpr std::array<std::string_view, kOpCount> kOpNames = {
    "mut_C_strengthen",      "mut_C_relax",          "mut_T_toggle_tone",
    "mut_T_technicality",    "mut_F_schema_swap",    "mut_F_toggle_code_block",
    "mut_F_toggle_prelude",  "mut_R_add_step",       "mut_R_remove_step",
    "mut_R_toggle_self_check", "mut_I_refocus",      "mut_L_length_policy",
    "cx_swap_gene",          "cx_conflict_synthesis",
};

template <class E, int N>
E cycle_next(E e) {
  return static_cast<E>((idx(e) + 1) % N);
}

std::vector<int> absent(const std::vector<int>& pool, const std::vector<int>& have) {
  std::vector<int> out;
  for (int p : pool) {
    if (std::find(have.begin(), have.end(), p) == have.end()) out.push_back(p);
  }
  return out;
}

bool other_intent_available(const Genotype& a, const SearchSpace& space) {
  return std::any_of(space.intents.begin(), space.intents.end(),
                     [&](Intent i) { return i != a.intent; });
}

LengthPolicy next_length(LengthPolicy cur, const std::vector<LengthPolicy>& cycle) {
  auto it = std::find(cycle.begin(), cycle.end(), cur);
  if (it == cycle.end()) return cycle.front();
  ++it;
  return it == cycle.end() ? cycle.front() : *it;
}

void set_step_flags(Genotype& g, int step) {
  const auto key = step_library()[step].key;
  if (key == "SelfCorrect") g.self_check = true;
  if (key == "ResolveConflicts") g.conflict_resolution = true;
  if (key == "FinalCheck") g.post_check = true;
}

}  // namespace

std::string_view op_name(Op op) { return kOpNames.at(idx(op)); }

std::optional<Op> op_from_name(std::string_view name) {
  for (int i = 0; i < kOpCount; ++i) {
    if (kOpNames[i] == name) return static_cast<Op>(i);
  }
  return std::nullopt;
}

int op_arity(Op op) { return op_name(op).starts_with("cx_") ? 2 : 1; }

const std::array<Op, kOpCount>& all_ops() {
  static const std::array<Op, kOpCount> ops = [] {
    std::array<Op, kOpCount> a{};
    for (int i = 0; i < kOpCount; ++i) a[i] = static_cast<Op>(i);
    return a;
  }();
  return ops;
}

SearchSpace SearchSpace::full() {
  SearchSpace s;
  for (int i = 0; i < static_cast<int>(clause_library().size()); ++i) s.clause_pool.push_back(i);
  for (int i = 0; i < static_cast<int>(step_library().size()); ++i) s.step_pool.push_back(i);
  for (int i = 0; i < kIntentCount; ++i) s.intents.push_back(static_cast<Intent>(i));
  s.length_cycle = {LengthPolicy::keep, LengthPolicy::shorten, LengthPolicy::expand};
  s.operators.assign(all_ops().begin(), all_ops().end());
  return s;
}

bool SearchSpace::allows(Op op) const {
  return std::find(operators.begin(), operators.end(), op) != operators.end();
}

bool is_applicable(Op op, const Genotype& a, bool has_b, const SearchSpace& space) {
  if (!space.allows(op)) return false;
  switch (op) {
    case Op::mut_C_strengthen:
      return (a.clauses.size() < kMaxClauses && !absent(space.clause_pool, a.clauses).empty()) ||
             a.strength < space.max_strength;
    case Op::mut_C_relax:
      return !a.clauses.empty() || a.strength > space.min_strength;
    case Op::mut_R_add_step:
      return a.steps.size() < kMaxSteps && !absent(space.step_pool, a.steps).empty();
    case Op::mut_R_remove_step:
      return !a.steps.empty();
    case Op::mut_I_refocus:
      return other_intent_available(a, space);
    case Op::mut_L_length_policy:
      return space.length_cycle.size() >= 2 ||
             (space.length_cycle.size() == 1 && space.length_cycle.front() != a.length);
    case Op::cx_swap_gene:
    case Op::cx_conflict_synthesis:
      return has_b;
    default:
      return true;
  }
}

Genotype apply_operator(Op op, const Genotype& a, const Genotype* b, Rng& rng) {
  static const SearchSpace full = SearchSpace::full();
  return apply_operator(op, a, b, rng, full);
}

Genotype apply_operator(Op op, const Genotype& a, const Genotype* b, Rng& rng,
                        const SearchSpace& space) {
  if (op_arity(op) == 2 && b == nullptr) {
    throw std::invalid_argument(std::string(op_name(op)) + " requires a second parent");
  }
  if (!is_applicable(op, a, b != nullptr, space)) {
    throw std::invalid_argument(std::string(op_name(op)) + " is not applicable to this genotype");
  }
  Genotype g = a;
  switch (op) {
    case Op::mut_C_strengthen: {
      auto pool = absent(space.clause_pool, g.clauses);
      if (g.clauses.size() < kMaxClauses && !pool.empty()) {
        g.clauses.push_back(pool[rng.uniform(pool.size())]);
        std::sort(g.clauses.begin(), g.clauses.end());
      }
      if (g.strength < space.max_strength) g.strength = static_cast<Strength>(idx(g.strength) + 1);
      break;
    }
    case Op::mut_C_relax:
      if (!g.clauses.empty()) g.clauses.erase(g.clauses.begin() + rng.uniform(g.clauses.size()));
      if (g.strength > space.min_strength) g.strength = static_cast<Strength>(idx(g.strength) - 1);
      break;
    case Op::mut_T_toggle_tone:
      g.tone = cycle_next<Tone, 5>(g.tone);
      break;
    case Op::mut_T_technicality:
      g.technicality = cycle_next<Technicality, 3>(g.technicality);
      break;
    case Op::mut_F_schema_swap:
      g.schema = cycle_next<Schema, 4>(g.schema);
      break;
    case Op::mut_F_toggle_code_block:
      g.use_code_block = !g.use_code_block;
      break;
    case Op::mut_F_toggle_prelude:
      g.has_prelude = !g.has_prelude;
      break;
    case Op::mut_R_add_step: {
      auto pool = absent(space.step_pool, g.steps);
      const int s = pool[rng.uniform(pool.size())];
      g.steps.push_back(s);
      set_step_flags(g, s);
      break;
    }
    case Op::mut_R_remove_step:
      g.steps.erase(g.steps.begin() + rng.uniform(g.steps.size()));
      break;
    case Op::mut_R_toggle_self_check:
      g.self_check = !g.self_check;
      break;
    case Op::mut_I_refocus: {
      std::vector<Intent> options;
      for (Intent i : space.intents) {
        if (i != g.intent) options.push_back(i);
      }
      g.intent = options[rng.uniform(options.size())];
      g.instruction = std::string(intent_instruction(g.intent));
      break;
    }
    case Op::mut_L_length_policy:
      g.length = next_length(g.length, space.length_cycle);
      break;
    case Op::cx_swap_gene: {
      const Genotype& o = *b;
      if (!rng.bernoulli(0.5)) {
        g.intent = o.intent;
        g.instruction = o.instruction;
      }
      if (!rng.bernoulli(0.5)) {
        g.clauses = o.clauses;
        g.strength = o.strength;
        g.length = o.length;
      }
      if (!rng.bernoulli(0.5)) {
        g.steps = o.steps;
        g.self_check = o.self_check;
        g.conflict_resolution = o.conflict_resolution;
        g.post_check = o.post_check;
      }
      if (!rng.bernoulli(0.5)) {
        g.schema = o.schema;
        g.use_code_block = o.use_code_block;
        g.has_prelude = o.has_prelude;
      }
      if (!rng.bernoulli(0.5)) {
        g.tone = o.tone;
        g.technicality = o.technicality;
      }
      break;
    }
    case Op::cx_conflict_synthesis: {
      const Genotype& o = *b;
      for (int c : o.clauses) {
        if (g.clauses.size() >= kMaxClauses) break;
        if (std::find(g.clauses.begin(), g.clauses.end(), c) == g.clauses.end()) g.clauses.push_back(c);
      }
      std::sort(g.clauses.begin(), g.clauses.end());
      for (int s : o.steps) {
        if (g.steps.size() >= kMaxSteps) break;
        if (std::find(g.steps.begin(), g.steps.end(), s) == g.steps.end()) g.steps.push_back(s);
      }
      break;
    }
  }
  return g;
}

std::string operator_catalog_text() {
  std::ostringstream out;
  out << "Mutation operators (one parent):\n"
      << "- mut_C_strengthen: add one constraint clause and raise constraint strictness\n"
      << "- mut_C_relax: drop one constraint clause and lower constraint strictness\n"
      << "- mut_T_toggle_tone: move tone to the next of neutral, assertive, simple, technical, formal\n"
      << "- mut_T_technicality: move technicality to the next of low, mid, high\n"
      << "- mut_F_schema_swap: move output_schema to the next of prose, bullets, sections, qa\n"
      << "- mut_F_toggle_code_block: flip use_code_block\n"
      << "- mut_F_toggle_prelude: flip has_prelude\n"
      << "- mut_R_add_step: append one reasoning step\n"
      << "- mut_R_remove_step: remove one reasoning step\n"
      << "- mut_R_toggle_self_check: flip self_check\n"
      << "- mut_I_refocus: switch the instruction to another intent\n"
      << "- mut_L_length_policy: move length_policy to the next of keep, shorten, expand\n"
      << "Crossover operators (two parents):\n"
      << "- cx_swap_gene: take each of the I/C/R/F/T blocks from Parent A or Parent B\n"
      << "- cx_conflict_synthesis: keep Parent A's choices and merge in Parent B's clauses and steps\n"
      << "Genotype vocabulary:\n- intents:";
  for (const auto& i : intent_table()) out << " " << i.label;
  out << "\n- clauses:";
  for (const auto& c : clause_library()) out << " " << c.key;
  out << "\n- steps:";
  for (const auto& s : step_library()) out << " " << s.key;
  out << "\n- strength: soft normal strict\n"
      << "- output_schema: prose bullets sections qa\n"
      << "- tone: neutral assertive simple technical formal\n"
      << "- technicality: low mid high\n"
      << "- length_policy: keep shorten expand\n"
      << "JSON shape: {\"I\":{\"intent\",\"text\"},\"C\":{\"clauses\",\"strength\",\"length_policy\"},"
         "\"R\":{\"steps\",\"self_check\",\"conflict_resolution\",\"post_check\"},"
         "\"F\":{\"output_schema\",\"use_code_block\",\"has_prelude\"},"
         "\"T\":{\"tone\",\"technicality\"}}\n";
  return out.str();
}

// ---- strategies ----

std::string_view source_name(RewardSource s) { return s == RewardSource::ge ? "ge" : "critic"; }

Strategy make_strategy(std::string id, Genotype g, Lineage lineage) {
  validate(g);
  Strategy s;
  s.id = std::move(id);
  s.summary = render_summary(g);
  s.genotype = std::move(g);
  s.lineage = std::move(lineage);
  return s;
}

Genotype noop_genotype() {
  Genotype g;
  g.instruction = std::string(intent_instruction(Intent::none));
  return g;
}

std::vector<Strategy> seed_strategies() {
  struct SeedDef {
    Intent intent;
    std::array<std::string_view, 3> clauses;
  };
  static const std::array<SeedDef, 9> defs = {{
      {Intent::keyword_stuffing, {"PreserveCoreInfo", "KeepStructure", "InlineKeywords"}},
      {Intent::unique_words, {"PreserveMeaning", "NoNewClaims", "KeepLengthStructure"}},
      {Intent::easy_to_understand, {"NoOmission", "KeepStructureLength", "RephraseOnly"}},
      {Intent::authoritative, {"NoNewFacts", "KeepFormatting", "NoExaggeration"}},
      {Intent::technical_words, {"PreserveNoClaims", "StructureUnchanged", "TechnicalPhrasing"}},
      {Intent::fluency, {"CoreContentFixed", "SmoothTransitions", "StructureLengthSame"}},
      {Intent::cite_sources, {"VerifiableCitations", "NoCoreChangeNoClaims", "CitationBudget"}},
      {Intent::quotation, {"AttributableQuotes", "CoreSimilarLength", "InlineQuotes"}},
      {Intent::statistics, {"VerifiableStatistics", "StatsInlineOnly", "StopAtSourceEnd"}},
  }};
  std::vector<Strategy> out;
  for (const auto& d : defs) {
    Genotype g;
    g.intent = d.intent;
    g.instruction = std::string(intent_instruction(d.intent));
    for (auto k : d.clauses) g.clauses.push_back(clause_index(k));
    std::sort(g.clauses.begin(), g.clauses.end());
    g.strength = Strength::normal;
    if (d.intent == Intent::authoritative) g.tone = Tone::assertive;
    if (d.intent == Intent::easy_to_understand) g.tone = Tone::simple;
    if (d.intent == Intent::technical_words) {
      g.tone = Tone::technical;
      g.technicality = Technicality::high;
    }
    std::string id = "seed-" + std::string(intent_name(d.intent));
    std::replace(id.begin(), id.end(), '_', '-');
    out.push_back(make_strategy(std::move(id), std::move(g)));
  }
  return out;
}

nlohmann::json to_json(const Strategy& s) {
  nlohmann::json ops = nlohmann::json::array();
  for (Op op : s.lineage.ops) ops.push_back(std::string(op_name(op)));
  return {
      {"id", s.id},
      {"genotype", to_json(s.genotype)},
      {"summary", s.summary},
      {"lineage", {{"parents", s.lineage.parents}, {"depth", s.lineage.depth}, {"ops", ops}}},
      {"reward", s.reward},
      {"source", std::string(source_name(s.source))},
  };
}

Strategy strategy_from_json(const nlohmann::json& j) {
  Lineage lin;
  const auto& l = j.at("lineage");
  lin.parents = l.at("parents").get<std::vector<std::string>>();
  lin.depth = l.at("depth").get<int>();
  for (const auto& name : l.at("ops")) {
    auto op = op_from_name(name.get<std::string>());
    if (!op) throw std::invalid_argument("unknown operator in lineage");
    lin.ops.push_back(*op);
  }
  Strategy s = make_strategy(j.at("id").get<std::string>(), genotype_from_json(j.at("genotype")),
                             std::move(lin));
  if (j.contains("summary") && j.at("summary").get<std::string>() != s.summary) {
    throw std::invalid_argument("strategy '" + s.id + "' summary does not match its genotype");
  }
  s.reward = j.at("reward").get<double>();
  const auto src = j.at("source").get<std::string>();
  if (src == "ge") {
    s.source = RewardSource::ge;
  } else if (src == "critic") {
    s.source = RewardSource::critic;
  } else {
    throw std::invalid_argument("unknown reward source '" + src + "'");
  }
  return s;
}

}  // namespace geo
