#include "imgquiz/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "imgquiz/error.hpp"
#include "imgquiz/serialize.hpp"
#include "imgquiz/stats.hpp"

namespace imgquiz::ranking {

namespace {

std::vector<double> scores_of(const ScoreMatrix& m) {
  std::vector<double> out(m.image_ids.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(m.correct_count(i)) / static_cast<double>(m.question_count);
  }
  return out;
}

std::vector<std::size_t> ordering(std::span<const double> scores,
                                  std::span<const std::string> ids) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  return order;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, bound) from a standardized engine, so sampled
// subsets are identical across standard libraries.
std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = gen();
    if (r >= threshold) return r % bound;
  }
}

void check_sizes(const ScoreMatrix& m, std::span<const std::size_t> sizes) {
  check_complete(m);
  if (m.question_count == 0) throw Error(ErrorKind::argument, "matrix has no questions");
  for (std::size_t s : sizes) {
    if (s < 1) throw Error(ErrorKind::argument, "quiz size must be at least 1");
    if (s > m.question_count) {
      throw Error(ErrorKind::argument, "quiz size " + std::to_string(s) + " exceeds " +
                                           std::to_string(m.question_count) + " questions");
    }
  }
}

double subset_agreement(const ScoreMatrix& m, std::span<const double> full,
                        std::span<const std::size_t> columns) {
  if (columns.size() == m.question_count) return 1.0;
  const ScoreMatrix sub = select_columns(m, columns);
  return rank_agreement(full, scores_of(sub), m.image_ids);
}

}  // namespace

std::vector<RankedImage> rank_images(const ScoreMatrix& matrix) {
  check_complete(matrix);
  if (matrix.image_ids.empty()) return {};
  if (matrix.question_count == 0) throw Error(ErrorKind::validation, "cannot rank without questions");

  const auto scores = scores_of(matrix);
  const auto z = zscores(scores);
  const auto order = ordering(scores, matrix.image_ids);
  std::vector<RankedImage> out;
  out.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    out.push_back({matrix.image_ids[i], matrix.correct_count(i), scores[i], pos + 1, z[i]});
  }
  return out;
}

std::vector<double> zscores(std::span<const double> scores) {
  std::vector<double> out(scores.size(), 0.0);
  if (scores.size() < 2) return out;
  const double m = stats::mean(scores);
  const double sd = std::sqrt(stats::sample_variance(scores));
  if (sd == 0.0) return out;
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - m) / sd;
  return out;
}

double popularity(std::uint64_t usage_count) {
  return std::log10(static_cast<double>(usage_count) + 1.0);
}

TriggerDecision should_trigger_contrastive(const ScoreMatrix& matrix, int threshold) {
  check_complete(matrix);
  TriggerDecision d;
  d.threshold = threshold;
  bool have_target = false, have_distractor = false;
  for (std::size_t i = 0; i < matrix.image_ids.size(); ++i) {
    const ImageLabel label = i < matrix.labels.size() ? matrix.labels[i] : ImageLabel::unknown;
    const std::size_t correct = matrix.correct_count(i);
    auto better = [&](bool have, std::size_t best, const std::string& best_id) {
      return !have || correct > best || (correct == best && matrix.image_ids[i] < best_id);
    };
    if (label == ImageLabel::target) {
      if (better(have_target, d.best_target_correct, d.best_target_image)) {
        d.best_target_correct = correct;
        d.best_target_image = matrix.image_ids[i];
      }
      have_target = true;
    } else if (label == ImageLabel::distractor) {
      if (better(have_distractor, d.best_distractor_correct, d.best_distractor_image)) {
        d.best_distractor_correct = correct;
        d.best_distractor_image = matrix.image_ids[i];
      }
      have_distractor = true;
    }
  }
  if (!have_target || !have_distractor) {
    throw Error(ErrorKind::labeling, "trigger check needs both target and distractor images");
  }
  const long long diff = static_cast<long long>(d.best_target_correct) -
                         static_cast<long long>(d.best_distractor_correct);
  d.triggered = diff <= threshold;
  return d;
}

std::vector<std::string> select_bundle(const ScoreMatrix& matrix, std::size_t budget) {
  check_complete(matrix);
  if (budget < 1) throw Error(ErrorKind::argument, "bundle budget must be at least 1");
  const std::size_t n = matrix.image_ids.size();
  std::vector<bool> covered(matrix.question_count, false);
  std::vector<bool> picked(n, false);
  std::vector<std::string> out;
  while (out.size() < budget) {
    std::size_t best = n;
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (picked[i]) continue;
      std::size_t gain = 0;
      for (std::size_t q = 0; q < matrix.question_count; ++q) {
        if (!covered[q] && matrix.at(i, q) == Cell::correct) ++gain;
      }
      if (gain == 0) continue;
      if (gain > best_gain || (gain == best_gain && matrix.image_ids[i] < matrix.image_ids[best])) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == n) break;
    picked[best] = true;
    out.push_back(matrix.image_ids[best]);
    for (std::size_t q = 0; q < matrix.question_count; ++q) {
      if (matrix.at(best, q) == Cell::correct) covered[q] = true;
    }
    if (std::all_of(covered.begin(), covered.end(), [](bool c) { return c; })) break;
  }
  return out;
}

double rank_agreement(std::span<const double> reference, std::span<const double> candidate,
                      std::span<const std::string> image_ids) {
  const auto ra = stats::average_ranks(reference);
  const auto rb = stats::average_ranks(candidate);
  if (ra == rb) return 1.0;
  try {
    return stats::spearman(reference, candidate);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::undefined_correlation) throw;
    return ordering(reference, image_ids) == ordering(candidate, image_ids) ? 1.0 : 0.0;
  }
}

ScoreMatrix select_columns(const ScoreMatrix& matrix, std::span<const std::size_t> columns) {
  ScoreMatrix sub;
  sub.concept_id = matrix.concept_id;
  sub.quiz_kind = matrix.quiz_kind;
  sub.image_ids = matrix.image_ids;
  sub.labels = matrix.labels;
  sub.question_count = columns.size();
  sub.cells.reserve(matrix.image_ids.size() * columns.size());
  for (std::size_t i = 0; i < matrix.image_ids.size(); ++i) {
    for (std::size_t q : columns) {
      if (q >= matrix.question_count) throw Error(ErrorKind::argument, "column out of range");
      sub.cells.push_back(matrix.at(i, q));
      if (!matrix.analyses.empty()) {
        sub.analyses.push_back(matrix.analyses[i * matrix.question_count + q]);
      }
    }
  }
  return sub;
}

StabilityCurve ablate_quiz_size(const ScoreMatrix& matrix, std::span<const std::size_t> sizes,
                                std::size_t repetitions, std::uint64_t seed) {
  check_sizes(matrix, sizes);
  if (repetitions < 1) throw Error(ErrorKind::argument, "repetitions must be at least 1");
  const auto full = scores_of(matrix);
  StabilityCurve curve;
  curve.repetitions = repetitions;
  curve.seed = seed;
  for (std::size_t size : sizes) {
    double total = 0.0;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      std::mt19937_64 gen(splitmix64(seed ^ splitmix64(size ^ splitmix64(rep))));
      std::vector<std::size_t> columns(matrix.question_count);
      std::iota(columns.begin(), columns.end(), 0);
      for (std::size_t i = 0; i < size; ++i) {
        const std::size_t j = i + bounded(gen, columns.size() - i);
        std::swap(columns[i], columns[j]);
      }
      columns.resize(size);
      std::sort(columns.begin(), columns.end());
      total += subset_agreement(matrix, full, columns);
    }
    curve.sizes.push_back(size);
    curve.mean_spearman.push_back(total / static_cast<double>(repetitions));
  }
  return curve;
}

StabilityCurve ablate_quiz_size_exhaustive(const ScoreMatrix& matrix,
                                           std::span<const std::size_t> sizes) {
  check_sizes(matrix, sizes);
  constexpr std::size_t kMaxSubsets = 1'000'000;
  const auto full = scores_of(matrix);
  const std::size_t n = matrix.question_count;
  StabilityCurve curve;
  for (std::size_t size : sizes) {
    // n choose size, bailing out before it grows past the cap
    double count = 1.0;
    for (std::size_t i = 0; i < size; ++i) count = count * static_cast<double>(n - i) / static_cast<double>(i + 1);
    if (count > static_cast<double>(kMaxSubsets)) {
      throw Error(ErrorKind::argument, "too many subsets to enumerate for size " + std::to_string(size));
    }
    std::vector<std::size_t> columns(size);
    std::iota(columns.begin(), columns.end(), 0);
    double total = 0.0;
    std::size_t visited = 0;
    for (;;) {
      total += subset_agreement(matrix, full, columns);
      ++visited;
      std::size_t i = size;
      while (i > 0 && columns[i - 1] == n - size + i - 1) --i;
      if (i == 0) break;
      ++columns[i - 1];
      for (std::size_t j = i; j < size; ++j) columns[j] = columns[j - 1] + 1;
    }
    curve.sizes.push_back(size);
    curve.mean_spearman.push_back(total / static_cast<double>(visited));
  }
  return curve;
}

std::string stability_to_tsv(const StabilityCurve& curve) {
  std::string out = "size\tmean_spearman\trepetitions\tseed\n";
  for (std::size_t i = 0; i < curve.sizes.size(); ++i) {
    out += std::to_string(curve.sizes[i]) + "\t" + format_real(curve.mean_spearman[i]) + "\t" +
           (curve.repetitions == 0 ? std::string("all") : std::to_string(curve.repetitions)) +
           "\t" + std::to_string(curve.seed) + "\n";
  }
  return out;
}

}  // namespace imgquiz::ranking
