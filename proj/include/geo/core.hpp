#pragma once

// Domain types shared by every module, and the cited-answer wire format
// ("sentence.[1][2] next sentence.[3]") used by generative engines.

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace geo {

struct Query {
  std::string id;
  std::string text;
};

struct Document {
  std::string id;
  std::string text;
  std::size_t rank_index = 0;

  bool operator==(const Document&) const = default;
};

/// The input context x = (q, d) a strategy is conditioned on.
struct Context {
  Query query;
  Document document;
};

/// Candidate documents retrieved for one query; `target_index` is the creator's document.
struct CandidateSet {
  std::vector<Document> docs;
  std::size_t target_index = 0;

  const Document& target() const { return docs.at(target_index); }

  /// Copy with the target document replaced (rank index and id preserved).
  CandidateSet with_target_text(std::string text) const;
};

/// Throws std::invalid_argument when an invariant does not hold.
void validate(const Query& q);
void validate(const CandidateSet& c);

struct Sentence {
  std::string text;
  std::size_t word_count = 0;
  std::set<int> citations;  // 1-based candidate indices

  bool operator==(const Sentence&) const = default;
};

struct CitedAnswer {
  std::vector<Sentence> sentences;

  std::size_t length() const { return sentences.size(); }
  bool operator==(const CitedAnswer&) const = default;
};

struct ParseWarning {
  std::size_t sentence = 0;
  int index = 0;
  std::string message;
};

/// Splits on '.', '!' or '?' followed by whitespace or end of input. The run of
/// "[k]" (or "[k, m]") markers trailing a sentence becomes its citation set and is
/// removed before word counting. Indices outside 1..n are dropped and reported
/// through `warnings`. Malformed markers stay in the text as prose.
CitedAnswer parse_cited_answer(std::string_view raw, int n,
                               std::vector<ParseWarning>* warnings = nullptr);

/// Emits sentences separated by a space, each followed by its markers in
/// ascending "[1][2]" form.
std::string render_cited_answer(const CitedAnswer& a);

}  // namespace geo
