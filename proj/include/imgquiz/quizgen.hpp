#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imgquiz/model.hpp"
#include "imgquiz/modelio.hpp"
#include "imgquiz/serialize.hpp"

namespace imgquiz::quizgen {

enum class Violation {
  leak,
  duplicate_option,
  bad_correct_answer,
  option_count,
  empty_stem,
  conflicting_choice,
};

std::string_view to_string(Violation v);

struct ValidationReport {
  std::size_t question_index = 0;
  std::vector<Violation> violations;

  bool accepted() const { return violations.empty(); }
  bool has(Violation v) const;
};

struct VisualText {
  std::string text;
  bool fallback = false;  // no heading matched; text is the whole article
};

// Appearance, Characteristics, Design, Architecture, Description, Details.
const std::vector<std::string>& default_section_allowlist();

// Bodies of sections whose heading contains an allowlisted pattern
// (case-insensitive), in document order.
VisualText extract_visual_sections(const Concept& subject,
                                   std::span<const std::string> section_allowlist);

// Title and aliases plus their disambiguator-free and joined-up variants.
std::vector<std::string> alias_blocklist(const Concept& subject);

ValidationReport validate_question(const Question& q, const Concept& subject,
                                   std::size_t question_index = 0);
ValidationReport validate_question(const Question& q, std::span<const std::string> blocklist,
                                   std::size_t question_index = 0);

// One report per record of a question document (an array, or an object with
// "questions"), in order. Throws Error(parse) when neither shape is present.
std::vector<ValidationReport> validate_document(const Json& doc, std::span<const std::string> blocklist);

// Every well-formed JSON object or array found in free text, in order of
// appearance. Code fences and surrounding prose are skipped.
std::vector<Json> find_json_documents(std::string_view text);

// The first document that is a non-empty array of objects, or an object
// holding such an array under "questions".
std::optional<Json> extract_question_array(std::string_view text);

struct GenerationSettings {
  std::string model_id = "gpt-4o";
  std::size_t surviving_floor = 3;
  std::vector<std::string> section_allowlist = default_section_allowlist();
  modelio::DecodeSettings decode;
};

struct QuizBuild {
  Quiz quiz;
  std::vector<ValidationReport> rejected;
  std::vector<std::string> raw_outputs;
  int model_calls = 0;
  bool used_full_article = false;
  std::optional<FeatureContrast> contrast;
};

// Throws GenerationError when no attempt yields a parseable document and
// Error(empty_quiz) when parsing worked but no question survived.
QuizBuild generate_base_quiz(const Concept& subject, modelio::Gateway& gateway,
                             const GenerationSettings& settings = {});

// Reads the three feature lists from a comparison answer and makes them
// pairwise disjoint by dropping shared features from the distinct lists.
// Throws Error(parse) when any of the three lists is missing.
FeatureContrast parse_feature_contrast(std::string_view text);

FeatureContrast contrast_features(const Concept& target, std::span<const Concept> distractors,
                                  modelio::Gateway& gateway,
                                  const GenerationSettings& settings = {});

enum class FeatureSide { target, distractor, common, none };

// Which feature list an option's text belongs to, by token overlap.
FeatureSide classify_option(std::string_view option_text, const FeatureContrast& contrast,
                            std::string* matched_feature = nullptr);

// conflicting_choice when the correct option is a distractor or shared feature,
// when a wrong option is a target feature, or when every option is shared.
bool has_conflicting_choice(const Question& q, const FeatureContrast& contrast);

// Throws Error(no_contrast) when the target has no distinct features.
QuizBuild generate_contrastive_quiz(const Concept& target, std::span<const Concept> distractors,
                                    modelio::Gateway& gateway,
                                    const GenerationSettings& settings = {});

}  // namespace imgquiz::quizgen
