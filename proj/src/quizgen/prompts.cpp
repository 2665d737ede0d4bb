#include "imgquiz/prompts.hpp"

namespace imgquiz::assets {
std::string_view question_generation();
std::string_view comparative_question_generation();
std::string_view vlm_instructions();
}  // namespace imgquiz::assets

namespace imgquiz::prompts {

std::string_view question_generation_template() { return assets::question_generation(); }
std::string_view comparative_template() { return assets::comparative_question_generation(); }
std::string_view vlm_instructions() { return assets::vlm_instructions(); }

std::string render_question_generation(std::string_view article_text) {
  std::string out(question_generation_template());
  out += "\n\nArticle:\n";
  out += article_text;
  return out;
}

std::string render_comparative(std::string_view target_description,
                               std::string_view distractor_description) {
  std::string out(comparative_template());
  out += "\n\nObject A:\n";
  out += target_description;
  out += "\n\nObject B:\n";
  out += distractor_description;
  return out;
}

}  // namespace imgquiz::prompts
