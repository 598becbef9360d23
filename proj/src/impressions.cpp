#include "geo/impressions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace geo {

double position_weight(std::size_t i, std::size_t L) {
  if (L == 0 || i >= L) {
    throw std::out_of_range("position_weight: index " + std::to_string(i) +
                            " outside answer of length " + std::to_string(L));
  }
  if (L == 1) return 1.0;
  return std::exp(-static_cast<double>(i) / static_cast<double>(L - 1));
}

ImpressionScores compute_impressions(const CitedAnswer& a, int j) {
  ImpressionScores s;
  const std::size_t L = a.sentences.size();
  for (std::size_t i = 0; i < L; ++i) {
    const auto& sent = a.sentences[i];
    if (!sent.citations.contains(j)) continue;
    const double share = 1.0 / static_cast<double>(sent.citations.size());
    const double w = position_weight(i, L);
    const double wc = static_cast<double>(sent.word_count);
    s.word += wc * share;
    s.pos += w * share;
    s.overall += wc * w * share;
  }
  return s;
}

std::vector<ImpressionScores> compute_all_impressions(const CitedAnswer& a, int n,
                                                      bool share_of_total) {
  std::vector<ImpressionScores> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  ImpressionScores total;
  for (int j = 1; j <= n; ++j) {
    out.push_back(compute_impressions(a, j));
    total.word += out.back().word;
    total.pos += out.back().pos;
    total.overall += out.back().overall;
  }
  if (share_of_total) {
    auto scale = [](double v, double sum) { return sum > 0.0 ? 100.0 * v / sum : 0.0; };
    for (auto& s : out) {
      s.word = scale(s.word, total.word);
      s.pos = scale(s.pos, total.pos);
      s.overall = scale(s.overall, total.overall);
    }
  }
  return out;
}

SensitivityProfile sensitivity_profile(std::span<const double> overall_scores) {
  if (overall_scores.empty()) throw std::invalid_argument("sensitivity_profile: no scores");
  SensitivityProfile p;
  p.max_gain = *std::max_element(overall_scores.begin(), overall_scores.end());
  if (p.max_gain <= 0.0) return p;
  const double threshold = kNearOptimalFraction * p.max_gain;
  const auto near = std::count_if(overall_scores.begin(), overall_scores.end(),
                                  [&](double r) { return r >= threshold; });
  p.sensitivity =
      1.0 - static_cast<double>(near) / static_cast<double>(overall_scores.size());
  return p;
}

}  // namespace geo
