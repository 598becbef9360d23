#include "geo/core.hpp"

#include <cctype>
#include <stdexcept>
#include <unordered_set>

#include "geo/text.hpp"

namespace geo {

CandidateSet CandidateSet::with_target_text(std::string text) const {
  CandidateSet out = *this;
  out.docs.at(target_index).text = std::move(text);
  return out;
}

void validate(const Query& q) {
  if (text::trim(q.text).empty()) throw std::invalid_argument("query text is empty");
}

void validate(const CandidateSet& c) {
  if (c.docs.empty()) throw std::invalid_argument("candidate set is empty");
  if (c.target_index >= c.docs.size()) {
    throw std::invalid_argument("target index " + std::to_string(c.target_index) +
                                " outside candidate set of size " + std::to_string(c.docs.size()));
  }
  std::unordered_set<std::string> ids;
  for (const auto& d : c.docs) {
    if (text::trim(d.text).empty()) throw std::invalid_argument("document '" + d.id + "' is empty");
    if (!ids.insert(d.id).second) throw std::invalid_argument("duplicate document id '" + d.id + "'");
  }
}

namespace {

constexpr std::size_t npos = std::string_view::npos;

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Parses "[k]" or "[k, m, ...]" starting at `pos`. Returns one past ']' or npos.
std::size_t parse_marker(std::string_view s, std::size_t pos, std::vector<long>* out) {
  if (pos >= s.size() || s[pos] != '[') return npos;
  std::size_t i = pos + 1;
  std::vector<long> vals;
  auto skip = [&] {
    while (i < s.size() && is_space(s[i])) ++i;
  };
  skip();
  for (;;) {
    if (i >= s.size() || !is_digit(s[i])) return npos;
    long v = 0;
    std::size_t digits = 0;
    while (i < s.size() && is_digit(s[i])) {
      if (++digits > 9) return npos;
      v = v * 10 + (s[i] - '0');
      ++i;
    }
    vals.push_back(v);
    skip();
    if (i < s.size() && s[i] == ',') {
      ++i;
      skip();
      continue;
    }
    if (i < s.size() && s[i] == ']') {
      ++i;
      break;
    }
    return npos;
  }
  if (out != nullptr) out->insert(out->end(), vals.begin(), vals.end());
  return i;
}

std::vector<std::string_view> split_sentences(std::string_view raw) {
  std::vector<std::string_view> segments;
  std::size_t start = 0;
  std::size_t i = 0;
  const std::size_t n = raw.size();
  while (i < n) {
    if (!is_terminal(raw[i])) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < n && is_terminal(raw[end])) ++end;
    std::size_t m = end;
    for (;;) {
      std::size_t k = m;
      while (k < n && is_space(raw[k])) ++k;
      std::size_t e = parse_marker(raw, k, nullptr);
      if (e == npos) break;
      m = e;
    }
    if (m == n || is_space(raw[m])) {
      segments.push_back(raw.substr(start, m - start));
      start = m;
      i = m;
    } else {
      i = end;
    }
  }
  if (start < n) segments.push_back(raw.substr(start));
  return segments;
}

}  // namespace

CitedAnswer parse_cited_answer(std::string_view raw, int n, std::vector<ParseWarning>* warnings) {
  if (n < 1) throw std::invalid_argument("candidate count must be >= 1");
  CitedAnswer answer;
  for (auto seg_raw : split_sentences(raw)) {
    std::string_view seg = text::trim(seg_raw);
    if (seg.empty()) continue;

    // Peel trailing whitespace, terminal punctuation and citation markers.
    std::vector<long> cites;
    std::string punct;
    std::size_t e = seg.size();
    for (;;) {
      while (e > 0 && is_space(seg[e - 1])) --e;
      if (e == 0) break;
      if (is_terminal(seg[e - 1])) {
        punct.insert(punct.begin(), seg[e - 1]);
        --e;
        continue;
      }
      if (seg[e - 1] == ']') {
        std::size_t b = seg.rfind('[', e - 1);
        std::vector<long> vals;
        if (b != npos && parse_marker(seg, b, &vals) == e) {
          cites.insert(cites.end(), vals.begin(), vals.end());
          e = b;
          continue;
        }
      }
      break;
    }

    std::string body = text::normalize_space(seg.substr(0, e));
    if (body.empty()) {
      if (warnings != nullptr) {
        warnings->push_back({answer.sentences.size(), 0, "sentence without words dropped"});
      }
      continue;
    }
    Sentence s;
    s.text = body + punct;
    s.word_count = text::count_words(s.text);
    for (long c : cites) {
      if (c < 1 || c > n) {
        if (warnings != nullptr) {
          warnings->push_back({answer.sentences.size(), static_cast<int>(c > 1000000 ? -1 : c),
                               "citation index " + std::to_string(c) + " outside 1.." +
                                   std::to_string(n)});
        }
        continue;
      }
      s.citations.insert(static_cast<int>(c));
    }
    answer.sentences.push_back(std::move(s));
  }
  return answer;
}

std::string render_cited_answer(const CitedAnswer& a) {
  std::string out;
  for (const auto& s : a.sentences) {
    if (!out.empty()) out.push_back(' ');
    out.append(s.text);
    for (int c : s.citations) out.append("[" + std::to_string(c) + "]");
  }
  return out;
}

}  // namespace geo
