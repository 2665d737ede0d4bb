#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace imgquiz {

struct Section {
  std::string heading;  // empty for the lead
  std::string body;

  bool operator==(const Section&) const = default;
};

// A subject about which quizzes are generated.
struct Concept {
  std::string id;
  std::string title;
  std::vector<std::string> aliases;  // leak blocklist; always includes title
  std::string article_text;
  std::vector<Section> sections;     // bodies are substrings of article_text
  std::optional<std::string> category;
  std::vector<std::string> categories;
  std::vector<std::string> links;    // titles linked from lead / visual sections

  bool operator==(const Concept&) const = default;
};

// Builds a concept from sections, deriving id, article_text and aliases.
Concept make_concept(std::string title, std::vector<Section> sections,
                     std::vector<std::string> extra_aliases = {});

// Checks id/title/alias/section invariants; throws Error(validation).
void check_invariants(const Concept& subject);

enum class QuizKind { base, contrastive };

std::string_view to_string(QuizKind kind);
QuizKind parse_quiz_kind(std::string_view s);

struct Question {
  std::string stem;
  std::vector<std::string> options;  // canonical "A) ..." form
  std::size_t correct_index = 0;
  std::string rationale;
  QuizKind origin = QuizKind::base;
  std::optional<std::vector<std::string>> source_features;

  bool operator==(const Question&) const = default;
};

inline constexpr std::size_t kMinOptions = 3;
inline constexpr std::size_t kMaxOptions = 5;
inline constexpr std::size_t kDefaultOptionCount = 4;
inline constexpr std::size_t kTypicalMinQuestions = 4;
inline constexpr std::size_t kTypicalMaxQuestions = 11;

struct Quiz {
  std::string concept_id;
  QuizKind kind = QuizKind::base;
  std::vector<Question> questions;
  std::vector<std::string> distractor_concept_ids;

  // True when the question count falls outside the typically observed range.
  bool size_warning() const {
    return questions.size() < kTypicalMinQuestions || questions.size() > kTypicalMaxQuestions;
  }

  bool operator==(const Quiz&) const = default;
};

// Throws Error(validation) on violated structural invariants.
void check_invariants(const Quiz& quiz);

// Returns "<letter>) <text>". Strips an existing letter prefix and
// surrounding whitespace. Throws Error(validation) if no text remains.
std::string canonicalize_option(std::string_view raw_option, std::size_t position);

// Option text without its letter prefix, folded for comparison.
std::string option_key(std::string_view option);

// Text after the "X) " prefix of a canonical option.
std::string_view option_body(std::string_view canonical_option);

enum class ImageLabel { target, distractor, unknown };

std::string_view to_string(ImageLabel label);
ImageLabel parse_image_label(std::string_view s);

struct ImageCandidate {
  std::string id;
  std::string file_name;
  std::optional<std::string> source_url;
  std::optional<std::string> thumb_url;
  std::optional<std::uint64_t> byte_size;
  std::optional<std::string> media_type;
  std::string content_hash;  // hex SHA-256 of the bytes, empty until fetched
  std::uint64_t usage_count = 0;
  std::optional<std::string> upload_date;  // ISO-8601 calendar date
  ImageLabel label = ImageLabel::unknown;

  bool operator==(const ImageCandidate&) const = default;
};

// Bytes of a candidate image, ready for a vision call.
struct LoadedImage {
  ImageCandidate candidate;
  std::string bytes;
  std::string media_type;
  bool scaled = false;
};

enum class OutcomeKind { selected, abstain, parse_failure, error };

struct AnswerOutcome {
  OutcomeKind kind = OutcomeKind::parse_failure;
  std::size_t option_index = 0;  // meaningful only when kind == selected

  static AnswerOutcome selected(std::size_t index) { return {OutcomeKind::selected, index}; }
  static AnswerOutcome abstain() { return {OutcomeKind::abstain, 0}; }
  static AnswerOutcome parse_failure() { return {OutcomeKind::parse_failure, 0}; }
  static AnswerOutcome error() { return {OutcomeKind::error, 0}; }

  bool operator==(const AnswerOutcome&) const = default;
};

struct AnswerRecord {
  std::string image_id;
  std::size_t question_index = 0;
  AnswerOutcome outcome;
  std::string raw_analysis;
  std::string model_id;
  int attempts = 0;

  bool operator==(const AnswerRecord&) const = default;
};

enum class Cell { correct, incorrect, abstain, error };

std::string_view to_string(Cell cell);
Cell parse_cell(std::string_view s);

// Dense images x questions grid of graded outcomes. Row i belongs to
// image_ids[i]; a complete matrix has exactly one cell per pair.
struct ScoreMatrix {
  std::string concept_id;
  QuizKind quiz_kind = QuizKind::base;
  std::vector<std::string> image_ids;
  std::vector<ImageLabel> labels;
  std::size_t question_count = 0;
  std::vector<Cell> cells;              // row-major
  std::vector<std::string> analyses;    // row-major raw_analysis, may be empty

  Cell at(std::size_t image, std::size_t question) const {
    return cells[image * question_count + question];
  }
  std::size_t correct_count(std::size_t image) const;
  bool all_error() const;

  bool operator==(const ScoreMatrix&) const = default;
};

// Throws Error(validation) unless every (image, question) pair has one cell.
void check_complete(const ScoreMatrix& matrix);

struct RankedImage {
  std::string image_id;
  std::size_t correct = 0;
  double score = 0.0;
  std::size_t rank = 0;
  double z_score = 0.0;

  bool operator==(const RankedImage&) const = default;
};

struct FeatureContrast {
  std::vector<std::string> distinct_to_target;
  std::vector<std::string> distinct_to_distractor;
  std::vector<std::string> common;

  bool operator==(const FeatureContrast&) const = default;
};

}  // namespace imgquiz
