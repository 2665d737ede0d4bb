#pragma once

#include <string>
#include <string_view>

// Prompt templates are stored byte-for-byte in assets/prompts and compiled in.
// Each has one substitution slot, appended after the template text.
namespace imgquiz::prompts {

inline constexpr std::string_view kTemplateVersion = "v1";

std::string_view question_generation_template();
std::string_view comparative_template();
std::string_view vlm_instructions();

std::string render_question_generation(std::string_view article_text);
std::string render_comparative(std::string_view target_description,
                               std::string_view distractor_description);

}  // namespace imgquiz::prompts
