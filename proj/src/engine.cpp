#include "geo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "geo/impressions.hpp"
#include "geo/rng.hpp"
#include "geo/text.hpp"

namespace geo {

const char* const kAnswerSynthesisPrompt =
    "Write an accurate and concise answer for the given user question.\n"
    "using only the provided summarized web search results.\n"
    "The answer should be correct, high-quality, and written by an expert\n"
    "using an unbiased and journalistic tone.\n"
    "The user's language of choice, such as English, Français, Español, or Deutsch\n"
    "should be used.\n"
    "The answer should be informative, interesting, and engaging.\n"
    "The answer's logic and reasoning should be rigorous and defensible.\n"
    "Every sentence in the answer should be immediately followed by an in-line\n"
    "citation to the search result(s).\n"
    "The cited search result(s) should fully support all the information in the\n"
    "sentence.\n"
    "Search results need to be cited using [index].\n"
    "When citing several search results, use [1][2][3] format rather than [1, 2, 3].\n"
    "You can use multiple search results to respond comprehensively while avoiding\n"
    "irrelevant search results.";

void SimulationParams::validate() const {
  if (sentences_per_answer < 1) throw std::invalid_argument("sentences_per_answer must be >= 1");
  for (double w : {keyword_overlap_w, statistic_w, quote_w, citation_marker_w}) {
    if (!std::isfinite(w)) throw std::invalid_argument("salience weights must be finite");
  }
  if (feature_cap < 0) throw std::invalid_argument("feature_cap must be >= 0");
}

// ---- features ----

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> s = {
      "the",  "and",   "for",   "are",   "what",  "how",   "why",   "who",   "when",
      "where", "which", "with", "does",  "did",   "can",   "you",   "your",  "that",
      "this", "from",  "into",  "about", "was",   "were",  "has",   "have",  "had",
      "will", "would", "should", "could", "than", "then",  "them",  "they",  "their",
      "there", "its",  "not",   "but",   "all",   "any",   "our",   "out",   "use",
      "most", "more",  "some",  "best",  "is",    "do"};
  return s;
}

std::set<std::string> doc_terms(std::string_view textv) {
  std::set<std::string> out;
  for (auto w : text::split_words(textv)) {
    auto t = text::term(w);
    if (!t.empty()) out.insert(std::move(t));
  }
  return out;
}

std::size_t count_substr(const std::string& hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::vector<std::string> query_terms(std::string_view query) {
  std::vector<std::string> out;
  for (auto w : text::split_words(query)) {
    auto t = text::term(w);
    if (t.size() < 3 || stopwords().contains(t)) continue;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
  }
  return out;
}

SalienceFeatures salience_features(const Query& q, const Document& d) {
  SalienceFeatures f;
  const auto qt = query_terms(q.text);
  if (!qt.empty()) {
    const auto dt = doc_terms(d.text);
    const auto hits = std::count_if(qt.begin(), qt.end(), [&](const auto& t) { return dt.contains(t); });
    f.keyword_overlap = static_cast<double>(hits) / static_cast<double>(qt.size());
  }
  for (auto w : text::split_words(d.text)) {
    if (std::any_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      ++f.digit_tokens;
    }
  }
  f.quote_pairs = static_cast<int>(std::count(d.text.begin(), d.text.end(), '"') / 2);
  const auto lower = text::to_lower(d.text);
  f.source_markers = static_cast<int>(count_substr(lower, "according to") +
                                      count_substr(lower, "reported by") +
                                      count_substr(lower, "source:"));
  return f;
}

// ---- simulated engine ----

SimulatedEngine::SimulatedEngine(SimulationParams p) : p_(p) { p_.validate(); }

double SimulatedEngine::salience(const Query& q, const Document& d) const {
  const auto f = salience_features(q, d);
  const auto cap = [&](int v) { return static_cast<double>(std::min(v, p_.feature_cap)); };
  return p_.keyword_overlap_w * f.keyword_overlap + p_.statistic_w * cap(f.digit_tokens) +
         p_.quote_w * cap(f.quote_pairs) + p_.citation_marker_w * cap(f.source_markers);
}

namespace {

constexpr std::array<std::string_view, 4> kSourcePhrases = {
    "according to the National Statistics Office,",
    "according to the World Health Organization,",
    "according to published industry standards,",
    "as reported by Reuters,",
};
constexpr std::array<std::string_view, 4> kQuotePhrases = {
    "\"the evidence here is consistent,\" noted one analyst,",
    "\"this point is widely accepted,\" said a senior researcher,",
    "\"the pattern holds across studies,\" one expert observed,",
    "\"it is a well documented effect,\" a review concluded,",
};

std::vector<std::string> tokens_of(std::string_view s) {
  std::vector<std::string> out;
  for (auto w : text::split_words(s)) out.emplace_back(w);
  return out;
}

struct RewritePlan {
  std::vector<std::vector<std::string>> items;  // inserted at random positions
  std::vector<std::string> prefix;              // markers, prelude
  std::vector<std::string> suffix;
  bool shorten = false;
  bool wrap_code = false;

  std::size_t added() const {
    std::size_t n = prefix.size() + suffix.size() + (wrap_code ? 2 : 0);
    for (const auto& i : items) n += i.size();
    return n;
  }
};

}  // namespace

Result<Document> SimulatedEngine::rewrite(const Document& d, const Strategy& s, const Query& q) {
  ++rewrite_calls_;
  const Genotype& g = s.genotype;
  Rng rng(text::mix(p_.seed ^ text::fnv1a(d.id)) ^ text::mix(text::fnv1a(s.id, 0x51ed270b27f1a3d5ULL)));

  RewritePlan plan;
  auto add_stat = [&] {
    plan.items.push_back(tokens_of("(about " + std::to_string(12 + rng.uniform(76)) + "% of cases)"));
  };
  auto add_source = [&] { plan.items.push_back(tokens_of(kSourcePhrases[rng.uniform(kSourcePhrases.size())])); };
  auto add_quote = [&] { plan.items.push_back(tokens_of(kQuotePhrases[rng.uniform(kQuotePhrases.size())])); };

  std::set<std::string> present = doc_terms(d.text);
  std::vector<std::string> missing;
  for (const auto& t : query_terms(q.text)) {
    if (!present.contains(t)) missing.push_back(t);
  }
  std::size_t next_missing = 0;
  auto add_terms = [&](std::size_t k) {
    for (; k > 0 && next_missing < missing.size(); --k) plan.items.push_back({missing[next_missing++]});
  };

  switch (g.intent) {
    case Intent::statistics: add_stat(); add_stat(); break;
    case Intent::cite_sources: add_source(); add_source(); break;
    case Intent::quotation: add_quote(); add_quote(); break;
    case Intent::keyword_stuffing: add_terms(10); break;
    case Intent::authoritative: plan.items.push_back(tokens_of("according to leading experts,")); break;
    default: break;
  }
  const int per_clause = g.strength == Strength::strict ? 2 : 1;
  for (int c : g.clauses) {
    switch (clause_library()[c].lever) {
      case Lever::statistic: for (int i = 0; i < per_clause; ++i) add_stat(); break;
      case Lever::source: for (int i = 0; i < per_clause; ++i) add_source(); break;
      case Lever::quote: for (int i = 0; i < per_clause; ++i) add_quote(); break;
      case Lever::keyword: add_terms(per_clause); break;
      case Lever::shorten: plan.shorten = true; break;
      case Lever::none: break;
    }
  }
  for (int st : g.steps) {
    if (step_library()[st].lever == Lever::keyword) add_terms(2);
  }
  if (g.length == LengthPolicy::shorten) plan.shorten = true;
  if (g.tone != Tone::neutral) plan.prefix.push_back("[tone:" + std::string(label(g.tone)) + "]");
  if (g.technicality != Technicality::mid) plan.prefix.push_back("[tech:" + std::string(label(g.technicality)) + "]");
  if (g.schema != Schema::prose) plan.prefix.push_back("[format:" + std::string(label(g.schema)) + "]");
  if (g.has_prelude) {
    plan.prefix.push_back("In");
    plan.prefix.push_back("short:");
  }
  if (g.length == LengthPolicy::expand) {
    for (auto& t : tokens_of("Further context follows from the points above.")) plan.suffix.push_back(t);
  }
  plan.wrap_code = g.use_code_block;

  if (plan.items.empty() && plan.prefix.empty() && plan.suffix.empty() && !plan.shorten && !plan.wrap_code) {
    return d;
  }

  std::vector<std::string> base = tokens_of(d.text);
  const std::size_t n = base.size();
  if (plan.shorten) {
    // Output never exceeds the original length: trim the insertions first,
    // then keep a prefix of the source.
    while (!plan.items.empty() && n > 0 && plan.added() > n - 1) plan.items.pop_back();
    if (n > 0 && plan.added() > n - 1) {
      plan.prefix.clear();
      plan.suffix.clear();
      plan.wrap_code = false;
    }
    const std::size_t room = n > plan.added() ? n - plan.added() : 1;
    const std::size_t keep = std::max<std::size_t>(1, std::min(n * 3 / 4, room));
    base.resize(std::min(keep, n));
  }
  for (const auto& item : plan.items) {
    const std::size_t pos = rng.uniform(base.size() + 1);
    base.insert(base.begin() + static_cast<std::ptrdiff_t>(pos), item.begin(), item.end());
  }
  std::vector<std::string> out = plan.prefix;
  if (plan.wrap_code) out.push_back("```");
  out.insert(out.end(), base.begin(), base.end());
  out.insert(out.end(), plan.suffix.begin(), plan.suffix.end());
  if (plan.wrap_code) out.push_back("```");

  Document r = d;
  r.text = text::join(out, " ");
  return r;
}

std::vector<int> allocate_sentences(const std::vector<double>& weights, int total) {
  std::vector<int> seats(weights.size(), 0);
  double sum = 0.0;
  for (double w : weights) sum += std::max(0.0, w);
  if (sum <= 0.0 || total <= 0) return seats;
  std::vector<double> rem(weights.size());
  int given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = total * std::max(0.0, weights[i]) / sum;
    seats[i] = static_cast<int>(std::floor(quota));
    rem[i] = quota - seats[i];
    given += seats[i];
  }
  std::vector<std::size_t> order(weights.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; given < total && k < order.size(); ++k, ++given) ++seats[order[k]];
  return seats;
}

Result<CitedAnswer> SimulatedEngine::synthesize_answer(const Query& q, const CandidateSet& cands) {
  ++synthesis_calls_;
  if (cands.docs.empty()) return BackendError{"empty candidate set", false};
  std::vector<double> sal;
  for (const auto& d : cands.docs) sal.push_back(salience(q, d));
  const auto seats = allocate_sentences(sal, p_.sentences_per_answer);

  std::vector<std::size_t> order(cands.docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sal[a] > sal[b]; });

  CitedAnswer ans;
  const std::uint64_t qseed = text::mix(p_.seed ^ text::fnv1a(q.id));
  for (std::size_t j : order) {
    std::vector<std::string> words;
    for (auto w : text::split_words(cands.docs[j].text)) {
      auto t = text::term(w);
      if (!t.empty()) words.push_back(std::move(t));
    }
    if (words.empty()) words.push_back("content");
    for (int k = 0; k < seats[j]; ++k) {
      Rng r(qseed ^ text::mix(static_cast<std::uint64_t>(k) + 1));
      const std::size_t wc = 8 + r.uniform(17);
      std::vector<std::string> sw;
      for (std::size_t w = 0; w < wc; ++w) sw.push_back(words[(k * 3 + w) % words.size()]);
      Sentence s;
      s.text = text::join(sw, " ") + ".";
      s.word_count = wc;
      s.citations = {static_cast<int>(j) + 1};
      ans.sentences.push_back(std::move(s));
    }
  }
  return ans;
}

// ---- remote engine ----

RemoteEngine::RemoteEngine(RemoteParams p) : client_(std::move(p)) {}

Result<Document> RemoteEngine::rewrite(const Document& d, const Strategy& s, const Query& q) {
  ++rewrite_calls_;
  auto r = client_.complete({{"system", render_prompt(s.genotype)},
                             {"user", "Query: " + q.text + "\n\nSource:\n" + d.text}});
  if (!ok(r)) return std::get<BackendError>(r);
  Document out = d;
  out.text = std::string(text::trim(std::get<std::string>(r)));
  return out;
}

Result<CitedAnswer> RemoteEngine::synthesize_answer(const Query& q, const CandidateSet& cands) {
  ++synthesis_calls_;
  std::ostringstream user;
  user << "Question: " << q.text << "\n\nSearch Results:\n";
  for (std::size_t i = 0; i < cands.docs.size(); ++i) user << "[" << i + 1 << "] " << cands.docs[i].text << "\n\n";
  auto r = client_.complete({{"system", kAnswerSynthesisPrompt}, {"user", user.str()}});
  if (!ok(r)) return std::get<BackendError>(r);
  return parse_cited_answer(std::get<std::string>(r), static_cast<int>(cands.docs.size()));
}

std::unique_ptr<Engine> make_engine(const EngineConfig& c) {
  if (c.kind == "simulated") return std::make_unique<SimulatedEngine>(c.simulated);
  if (c.kind == "remote") return std::make_unique<RemoteEngine>(c.remote);
  throw std::invalid_argument("unknown backend '" + c.kind + "'");
}

// ---- evaluation ----

std::string candidate_set_key(const Query& q, const CandidateSet& cands) {
  std::uint64_t h = text::fnv1a(q.text);
  for (const auto& d : cands.docs) {
    h = text::fnv1a(d.id, h ^ 0x1f);
    h = text::fnv1a(d.text, h ^ 0x2f);
  }
  h = text::mix(h ^ cands.target_index);
  return q.id + "#" + std::to_string(h);
}

Result<double> StrategyEvaluator::baseline(const Query& q, const CandidateSet& cands) {
  const auto key = candidate_set_key(q, cands);
  std::shared_future<Result<double>> fut;
  std::promise<Result<double>> promise;
  bool owner = false;
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      fut = it->second;
    } else {
      fut = promise.get_future().share();
      cache_.emplace(key, fut);
      owner = true;
    }
  }
  if (owner) {
    ++baseline_syntheses_;
    Result<double> value = BackendError{"baseline not computed", false};
    try {
      auto ans = engine_.synthesize_answer(q, cands);
      if (ok(ans)) {
        value = compute_impressions(std::get<CitedAnswer>(ans), static_cast<int>(cands.target_index) + 1).overall;
      } else {
        value = std::get<BackendError>(ans);
      }
    } catch (const std::exception& e) {
      value = BackendError{e.what(), false};
    }
    promise.set_value(value);
    if (!ok(value)) {
      std::lock_guard lock(mu_);
      cache_.erase(key);  // let a later call retry
    }
  }
  return fut.get();
}

Evaluation StrategyEvaluator::evaluate(const Query& q, const Strategy& s, const CandidateSet& cands) {
  Evaluation ev;
  auto rw = engine_.rewrite(cands.target(), s, q);
  if (!ok(rw)) {
    ev.error = std::get<BackendError>(rw).message;
    return ev;
  }
  ev.rewritten = std::get<Document>(rw);
  if (text::trim(ev.rewritten.text).empty()) {
    ev.error = "empty rewrite";
    return ev;
  }
  auto base = baseline(q, cands);
  if (!ok(base)) {
    ev.error = std::get<BackendError>(base).message;
    return ev;
  }
  auto ans = engine_.synthesize_answer(q, cands.with_target_text(ev.rewritten.text));
  if (!ok(ans)) {
    ev.error = std::get<BackendError>(ans).message;
    return ev;
  }
  const double overall =
      compute_impressions(std::get<CitedAnswer>(ans), static_cast<int>(cands.target_index) + 1).overall;
  ev.reward = overall - std::get<double>(base);
  return ev;
}

}  // namespace geo
