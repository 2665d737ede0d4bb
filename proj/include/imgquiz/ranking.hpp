#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "imgquiz/model.hpp"

namespace imgquiz::ranking {

// score = correct / question_count, sorted by score descending with ties
// broken by ascending image_id; ranks are 1..n. Throws Error(validation) on an
// incomplete matrix or one without questions.
std::vector<RankedImage> rank_images(const ScoreMatrix& matrix);

// (x - mean) / s with the n - 1 standard deviation. All zeros when n == 1 or s == 0.
std::vector<double> zscores(std::span<const double> scores);

// log10(usage_count + 1).
double popularity(std::uint64_t usage_count);

inline constexpr int kDefaultTriggerThreshold = 2;

struct TriggerDecision {
  bool triggered = false;
  std::size_t best_target_correct = 0;
  std::size_t best_distractor_correct = 0;
  int threshold = kDefaultTriggerThreshold;
  std::string best_target_image;
  std::string best_distractor_image;
};

// Triggered when best target correct count minus best distractor correct
// count is at most `threshold`. Throws Error(labeling) when either label
// class is missing from the matrix.
TriggerDecision should_trigger_contrastive(const ScoreMatrix& matrix,
                                           int threshold = kDefaultTriggerThreshold);

// Greedy cover of correctly answered questions; picks in selection order.
std::vector<std::string> select_bundle(const ScoreMatrix& matrix, std::size_t budget);

struct StabilityCurve {
  std::vector<std::size_t> sizes;
  std::vector<double> mean_spearman;
  std::size_t repetitions = 0;  // 0 when every subset was enumerated
  std::uint64_t seed = 0;
};

// For each size, samples that many question columns without replacement
// `repetitions` times and averages the Spearman correlation of the sub-quiz
// scores against the full-quiz scores.
StabilityCurve ablate_quiz_size(const ScoreMatrix& matrix, std::span<const std::size_t> sizes,
                                std::size_t repetitions, std::uint64_t seed);

// Same, averaging over every column subset of each size.
StabilityCurve ablate_quiz_size_exhaustive(const ScoreMatrix& matrix,
                                           std::span<const std::size_t> sizes);

// Spearman between two score vectors over the same images. When either side
// is fully tied the result is 1.0 if both induce the same ordering under the
// image_id tie-break, else 0.0.
double rank_agreement(std::span<const double> reference, std::span<const double> candidate,
                      std::span<const std::string> image_ids);

// Sub-matrix keeping only the given question columns, in the given order.
ScoreMatrix select_columns(const ScoreMatrix& matrix, std::span<const std::size_t> columns);

std::string stability_to_tsv(const StabilityCurve& curve);

}  // namespace imgquiz::ranking
