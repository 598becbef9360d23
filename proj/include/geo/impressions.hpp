#pragma once

// Visibility of a candidate document inside a cited answer: attributed word
// mass, position-decayed citation mass, and their product ("overall").

#include <span>
#include <vector>

#include "geo/core.hpp"

namespace geo {

struct ImpressionScores {
  double word = 0.0;
  double pos = 0.0;
  double overall = 0.0;
};

/// exp(-i / (L - 1)) for L > 1, and 1 for a single-sentence answer.
/// Throws std::out_of_range unless 0 <= i < L.
double position_weight(std::size_t i, std::size_t L);

/// Scores for the 1-based candidate `j`. A sentence citing |C| documents
/// contributes 1/|C| of its mass to each of them.
ImpressionScores compute_impressions(const CitedAnswer& a, int j);

/// Scores for candidates 1..n. With `share_of_total`, each metric is divided by
/// its sum over the n candidates and scaled to percent (all-zero stays zero).
std::vector<ImpressionScores> compute_all_impressions(const CitedAnswer& a, int n,
                                                      bool share_of_total = false);

/// Fraction of strategies that reach this share of the best score.
inline constexpr double kNearOptimalFraction = 0.55;

struct SensitivityProfile {
  double max_gain = 0.0;
  double sensitivity = 0.0;
};

/// sensitivity = 1 - (#scores >= 0.55 * max) / m, and 0 when max <= 0.
/// Throws std::invalid_argument on an empty sequence.
SensitivityProfile sensitivity_profile(std::span<const double> overall_scores);

}  // namespace geo
