#include "imgquiz/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "imgquiz/error.hpp"
#include "imgquiz/text.hpp"

namespace imgquiz {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::parse: return "parse";
    case ErrorKind::argument: return "argument";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::ambiguous_title: return "ambiguous_title";
    case ErrorKind::transient: return "transient";
    case ErrorKind::permanent: return "permanent";
    case ErrorKind::fixture_miss: return "fixture_miss";
    case ErrorKind::fixture_load: return "fixture_load";
    case ErrorKind::generation: return "generation";
    case ErrorKind::empty_quiz: return "empty_quiz";
    case ErrorKind::no_contrast: return "no_contrast";
    case ErrorKind::labeling: return "labeling";
    case ErrorKind::undefined_correlation: return "undefined_correlation";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::format: return "format";
    case ErrorKind::size: return "size";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Concept make_concept(std::string title, std::vector<Section> sections,
                     std::vector<std::string> extra_aliases) {
  Concept c;
  c.id = text::slugify(title);
  c.title = std::move(title);
  for (auto& s : sections) {
    s.body = std::string(text::trim(s.body));
    if (!c.article_text.empty()) c.article_text.append("\n\n");
    c.article_text.append(s.body);
  }
  c.sections = std::move(sections);
  c.aliases.push_back(c.title);
  for (auto& alias : extra_aliases) {
    const bool seen = std::any_of(c.aliases.begin(), c.aliases.end(), [&](const std::string& a) {
      return a == alias;
    });
    if (!seen && !text::trim(alias).empty()) c.aliases.push_back(std::move(alias));
  }
  return c;
}

void check_invariants(const Concept& subject) {
  if (subject.id.empty()) throw Error(ErrorKind::validation, "concept id is empty");
  if (std::find(subject.aliases.begin(), subject.aliases.end(), subject.title) ==
      subject.aliases.end()) {
    throw Error(ErrorKind::validation, "concept title missing from aliases: " + subject.title);
  }
  for (const auto& s : subject.sections) {
    if (subject.article_text.find(s.body) == std::string::npos) {
      throw Error(ErrorKind::validation, "section body not in article text: " + s.heading);
    }
  }
}

std::string_view to_string(QuizKind kind) {
  return kind == QuizKind::base ? "base" : "contrastive";
}

QuizKind parse_quiz_kind(std::string_view s) {
  if (s == "base") return QuizKind::base;
  if (s == "contrastive") return QuizKind::contrastive;
  throw Error(ErrorKind::parse, "unknown quiz kind: " + std::string(s));
}

namespace {

// Length of a leading "A)", "(A)", "A." or "A:" marker, or 0.
std::size_t letter_prefix_length(std::string_view s) {
  if (s.size() >= 3 && s[0] == '(' && std::isalpha(static_cast<unsigned char>(s[1])) &&
      s[2] == ')') {
    return 3;
  }
  if (s.size() >= 2 && std::isalpha(static_cast<unsigned char>(s[0]))) {
    if (s[1] == ')') return 2;
    // "A." and "A:" only count when followed by whitespace, so "A.D. 1200" survives.
    if ((s[1] == '.' || s[1] == ':') &&
        (s.size() == 2 || std::isspace(static_cast<unsigned char>(s[2])))) {
      return 2;
    }
  }
  return 0;
}

}  // namespace

std::string canonicalize_option(std::string_view raw_option, std::size_t position) {
  if (position >= 26) {
    throw Error(ErrorKind::argument, "option position out of range: " + std::to_string(position));
  }
  std::string_view body = text::trim(raw_option);
  body.remove_prefix(letter_prefix_length(body));
  std::string collapsed = text::collapse_whitespace(body);
  if (collapsed.empty()) {
    throw Error(ErrorKind::validation, "option text empty after stripping: '" +
                                           std::string(raw_option) + "'");
  }
  std::string out;
  out.push_back(static_cast<char>('A' + position));
  out.append(") ");
  out.append(collapsed);
  return out;
}

std::string_view option_body(std::string_view canonical_option) {
  std::string_view s = text::trim(canonical_option);
  s.remove_prefix(letter_prefix_length(s));
  return text::trim(s);
}

std::string option_key(std::string_view option) {
  return text::to_lower(text::collapse_whitespace(option_body(option)));
}

void check_invariants(const Quiz& quiz) {
  if (quiz.questions.empty()) throw Error(ErrorKind::validation, "quiz has no questions");
  if (quiz.kind == QuizKind::contrastive && quiz.distractor_concept_ids.empty()) {
    throw Error(ErrorKind::validation, "contrastive quiz without distractor concepts");
  }
  for (std::size_t qi = 0; qi < quiz.questions.size(); ++qi) {
    const Question& q = quiz.questions[qi];
    const std::string where = "question " + std::to_string(qi) + ": ";
    if (quiz.kind == QuizKind::contrastive && q.origin != QuizKind::contrastive) {
      throw Error(ErrorKind::validation, where + "base-origin question in contrastive quiz");
    }
    if (q.correct_index >= q.options.size()) {
      throw Error(ErrorKind::validation, where + "correct_index out of range");
    }
    std::set<std::string> seen;
    for (std::size_t oi = 0; oi < q.options.size(); ++oi) {
      const std::string& opt = q.options[oi];
      if (opt.size() < 3 || opt[0] != static_cast<char>('A' + oi) || opt[1] != ')' ||
          opt[2] != ' ') {
        throw Error(ErrorKind::validation, where + "option not canonical: " + opt);
      }
      if (!seen.insert(option_key(opt)).second) {
        throw Error(ErrorKind::validation, where + "duplicate option: " + opt);
      }
    }
  }
}

std::string_view to_string(ImageLabel label) {
  switch (label) {
    case ImageLabel::target: return "target";
    case ImageLabel::distractor: return "distractor";
    case ImageLabel::unknown: return "unknown";
  }
  return "unknown";
}

ImageLabel parse_image_label(std::string_view s) {
  if (s == "target") return ImageLabel::target;
  if (s == "distractor") return ImageLabel::distractor;
  if (s == "unknown") return ImageLabel::unknown;
  throw Error(ErrorKind::parse, "unknown image label: " + std::string(s));
}

std::string_view to_string(Cell cell) {
  switch (cell) {
    case Cell::correct: return "correct";
    case Cell::incorrect: return "incorrect";
    case Cell::abstain: return "abstain";
    case Cell::error: return "error";
  }
  return "error";
}

Cell parse_cell(std::string_view s) {
  if (s == "correct") return Cell::correct;
  if (s == "incorrect") return Cell::incorrect;
  if (s == "abstain") return Cell::abstain;
  if (s == "error") return Cell::error;
  throw Error(ErrorKind::parse, "unknown cell outcome: " + std::string(s));
}

std::size_t ScoreMatrix::correct_count(std::size_t image) const {
  std::size_t n = 0;
  for (std::size_t q = 0; q < question_count; ++q) {
    if (at(image, q) == Cell::correct) ++n;
  }
  return n;
}

bool ScoreMatrix::all_error() const {
  return !cells.empty() &&
         std::all_of(cells.begin(), cells.end(), [](Cell c) { return c == Cell::error; });
}

void check_complete(const ScoreMatrix& matrix) {
  if (matrix.cells.size() != matrix.image_ids.size() * matrix.question_count) {
    throw Error(ErrorKind::validation,
                "score matrix incomplete: " + std::to_string(matrix.cells.size()) + " cells for " +
                    std::to_string(matrix.image_ids.size()) + " images x " +
                    std::to_string(matrix.question_count) + " questions");
  }
  if (!matrix.labels.empty() && matrix.labels.size() != matrix.image_ids.size()) {
    throw Error(ErrorKind::validation, "score matrix labels do not match image rows");
  }
  if (!matrix.analyses.empty() && matrix.analyses.size() != matrix.cells.size()) {
    throw Error(ErrorKind::validation, "score matrix analyses do not match cells");
  }
  std::set<std::string> ids(matrix.image_ids.begin(), matrix.image_ids.end());
  if (ids.size() != matrix.image_ids.size()) {
    throw Error(ErrorKind::validation, "score matrix has duplicate image rows");
  }
}

}  // namespace imgquiz
