#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imgquiz/model.hpp"
#include "imgquiz/modelio.hpp"

namespace imgquiz::vlmquiz {

inline constexpr std::string_view kAbstainSentence = "I can't answer that based on the image.";

struct AnswerPrompt {
  std::string system_text;  // instruction template, verbatim
  std::string user_text;    // stem and canonical options, one per line
};

AnswerPrompt build_answer_prompt(const Question& question);

// Reads the payload of the last "Final answer:" line. Matching order: abstain
// sentence, full option string, letter, option text.
AnswerOutcome parse_final_answer(std::string_view raw, std::span<const std::string> options);

struct QuizSettings {
  std::string model_id = "gpt-4o";
  int max_format_retries = 2;
  modelio::DecodeSettings decode;
  std::size_t workers = 4;
  // Permutes the order in which cells are submitted; results never depend on it.
  std::optional<std::uint64_t> shuffle_seed;
};

modelio::ModelRequest answer_request(const Question& question, const LoadedImage& image,
                                     const QuizSettings& settings, int reminder = 0);

// Never throws for backend failures; they become an error outcome.
AnswerRecord administer(const Question& question, std::size_t question_index,
                        const LoadedImage& image, modelio::Gateway& gateway,
                        const QuizSettings& settings = {});

Cell grade(const AnswerOutcome& outcome, const Question& question);

struct MatrixBuild {
  ScoreMatrix matrix;
  std::vector<AnswerRecord> records;  // row-major, same layout as matrix.cells
  bool all_error = false;
};

MatrixBuild fill_matrix(const Quiz& quiz, std::span<const LoadedImage> images,
                        modelio::Gateway& gateway, const QuizSettings& settings = {});

// Blocklist entries found on token boundaries in a request's texts.
std::vector<std::string> grounding_leaks(const modelio::ModelRequest& request,
                                         std::span<const std::string> blocklist);

}  // namespace imgquiz::vlmquiz
