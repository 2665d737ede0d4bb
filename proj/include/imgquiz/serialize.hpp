#pragma once

#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imgquiz/model.hpp"

namespace imgquiz {

using Json = nlohmann::ordered_json;

// One question record in the generation wire schema. Options are already
// canonicalized; correct_index is empty when correct_answer matched nothing.
struct QuestionRecord {
  Question question;
  std::optional<std::size_t> correct_index;
  std::string raw_correct_answer;
};

// Resolves a correct_answer string against canonical options: full string
// first, then the bare letter. Returns nullopt when neither matches.
std::optional<std::size_t> resolve_correct_answer(std::string_view correct_answer,
                                                  std::span<const std::string> options);

// Reads an array of {"question","options","correct_answer","rationale"} records.
// Throws Error(parse) when the document is not an array of such objects;
// per-record option problems are reported through QuestionRecord.
std::vector<QuestionRecord> parse_question_records(const Json& doc, QuizKind origin);

Json question_to_json(const Question& q);

// Quiz document: envelope with the question records under "questions".
Json quiz_to_json(const Quiz& quiz);
Quiz quiz_from_json(const Json& doc);
std::string serialize_quiz(const Quiz& quiz);
Quiz parse_quiz(std::string_view document);

Json concept_to_json(const Concept& subject);
Concept concept_from_json(const Json& doc);

Json candidate_to_json(const ImageCandidate& c);
ImageCandidate candidate_from_json(const Json& doc);

Json matrix_to_json(const ScoreMatrix& m);
ScoreMatrix matrix_from_json(const Json& doc);

Json contrast_to_json(const FeatureContrast& f);
FeatureContrast contrast_from_json(const Json& doc);

// Tab-separated ranking table with header image_id, correct, score, rank, z_score.
std::string ranking_to_tsv(std::span<const RankedImage> ranking);
std::vector<RankedImage> ranking_from_tsv(std::string_view tsv);

// Fixed-precision rendering used in every table so files are byte-stable.
std::string format_real(double value);

}  // namespace imgquiz
