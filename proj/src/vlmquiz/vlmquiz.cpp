#include "imgquiz/vlmquiz.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <numeric>
#include <random>
#include <thread>

#include "imgquiz/error.hpp"
#include "imgquiz/prompts.hpp"
#include "imgquiz/text.hpp"

namespace imgquiz::vlmquiz {

namespace {

bool is_markup(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '_' || c == '`' ||
         c == '#' || c == '>' || c == '"' || c == '\'' || c == '[' || c == ']';
}

std::string_view strip_markup(std::string_view s) {
  while (!s.empty() && (is_markup(s.front()) || s.front() == '-')) s.remove_prefix(1);
  while (!s.empty() && (is_markup(s.back()) || s.back() == '.')) s.remove_suffix(1);
  return s;
}

// Payload after "final answer" and its colon, or nullopt when the line is not
// a final-answer line.
std::optional<std::string_view> final_answer_payload(std::string_view line) {
  std::string_view s = line;
  while (!s.empty() && (is_markup(s.front()) || s.front() == '-')) s.remove_prefix(1);
  constexpr std::string_view kLabel = "final answer";
  if (!text::starts_with_ci(s, kLabel)) return std::nullopt;
  s.remove_prefix(kLabel.size());
  while (!s.empty() && is_markup(s.front())) s.remove_prefix(1);
  if (s.empty() || s.front() != ':') return std::nullopt;
  s.remove_prefix(1);
  return s;
}

std::optional<std::size_t> letter_choice(std::string_view payload, std::size_t option_count) {
  std::string_view s = payload;
  if (text::starts_with_ci(s, "option ")) s.remove_prefix(7);
  bool open_paren = false;
  if (!s.empty() && s.front() == '(') {
    s.remove_prefix(1);
    open_paren = true;
  }
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return std::nullopt;
  const char c = s.front();
  s.remove_prefix(1);
  const bool alone = s.empty();
  const bool closed = !s.empty() && (s.front() == ')' || s.front() == '.' || s.front() == ':');
  if (!alone && !closed) return std::nullopt;
  // a lowercase "a." reads as prose; only accept lowercase with a bracket
  if (std::islower(static_cast<unsigned char>(c)) && !(closed && s.front() == ')') && !open_paren &&
      !alone) {
    return std::nullopt;
  }
  const auto index = static_cast<std::size_t>(std::toupper(static_cast<unsigned char>(c)) - 'A');
  if (index >= option_count) return std::nullopt;
  return index;
}

std::string trimmed_period(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return text::to_lower(text::collapse_whitespace(s));
}

std::string error_text(const Error& e) {
  return "error(" + std::string(to_string(e.kind())) + "): " + e.what();
}

}  // namespace

AnswerPrompt build_answer_prompt(const Question& question) {
  AnswerPrompt out;
  out.system_text = std::string(prompts::vlm_instructions());
  out.user_text = question.stem;
  for (const auto& opt : question.options) {
    out.user_text.push_back('\n');
    out.user_text.append(opt);
  }
  return out;
}

AnswerOutcome parse_final_answer(std::string_view raw, std::span<const std::string> options) {
  const auto lines = text::split_lines(text::straighten_quotes(raw));
  std::optional<std::string> payload;
  for (std::size_t i = lines.size(); i-- > 0;) {
    auto p = final_answer_payload(lines[i]);
    if (!p) continue;
    std::string_view body = strip_markup(*p);
    // "Final answer:" alone on its line, answer on the next non-empty line
    for (std::size_t j = i + 1; body.empty() && j < lines.size(); ++j) {
      body = strip_markup(lines[j]);
    }
    payload = std::string(body);
    break;
  }
  if (!payload || payload->empty()) return AnswerOutcome::parse_failure();

  if (text::contains_phrase(*payload, kAbstainSentence)) return AnswerOutcome::abstain();

  const std::string full = trimmed_period(*payload);
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (full == trimmed_period(options[i])) return AnswerOutcome::selected(i);
  }
  if (auto letter = letter_choice(*payload, options.size())) return AnswerOutcome::selected(*letter);

  const std::string body = trimmed_period(option_body(*payload));
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (body == trimmed_period(option_body(options[i]))) return AnswerOutcome::selected(i);
  }
  std::optional<std::size_t> contained;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (!text::contains_phrase(*payload, option_body(options[i]))) continue;
    if (contained) return AnswerOutcome::parse_failure();
    contained = i;
  }
  if (contained) return AnswerOutcome::selected(*contained);
  return AnswerOutcome::parse_failure();
}

modelio::ModelRequest answer_request(const Question& question, const LoadedImage& image,
                                     const QuizSettings& settings, int reminder) {
  if (image.candidate.content_hash.empty()) {
    throw Error(ErrorKind::argument, "image " + image.candidate.id + " has no content hash");
  }
  AnswerPrompt prompt = build_answer_prompt(question);
  if (reminder > 0) {
    prompt.user_text += "\n\nFormat reminder " + std::to_string(reminder) +
                        ": finish with one line that starts with \"Final answer:\" followed by "
                        "one of the options above or the sentence " +
                        std::string(kAbstainSentence);
  }
  modelio::ModelRequest req;
  req.model_id = settings.model_id;
  req.system_text = std::move(prompt.system_text);
  req.user_text = std::move(prompt.user_text);
  req.image = modelio::ImagePayload{image.bytes, image.media_type, image.candidate.content_hash};
  req.decode = settings.decode;
  return req;
}

AnswerRecord administer(const Question& question, std::size_t question_index,
                        const LoadedImage& image, modelio::Gateway& gateway,
                        const QuizSettings& settings) {
  AnswerRecord record;
  record.image_id = image.candidate.id;
  record.question_index = question_index;
  record.model_id = settings.model_id;
  for (int attempt = 0; attempt <= settings.max_format_retries; ++attempt) {
    record.attempts = attempt + 1;
    try {
      const auto response = gateway.complete(answer_request(question, image, settings, attempt));
      record.raw_analysis = response.text;
      record.outcome = parse_final_answer(response.text, question.options);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::argument) throw;
      record.raw_analysis = error_text(e);
      record.outcome = AnswerOutcome::error();
      return record;
    }
    if (record.outcome.kind != OutcomeKind::parse_failure) break;
  }
  return record;
}

Cell grade(const AnswerOutcome& outcome, const Question& question) {
  switch (outcome.kind) {
    case OutcomeKind::selected:
      return outcome.option_index == question.correct_index ? Cell::correct : Cell::incorrect;
    case OutcomeKind::abstain: return Cell::abstain;
    case OutcomeKind::parse_failure:
    case OutcomeKind::error: return Cell::error;
  }
  return Cell::error;
}

MatrixBuild fill_matrix(const Quiz& quiz, std::span<const LoadedImage> images,
                        modelio::Gateway& gateway, const QuizSettings& settings) {
  if (images.empty()) throw Error(ErrorKind::argument, "no images to quiz");
  if (quiz.questions.empty()) throw Error(ErrorKind::argument, "quiz has no questions");
  for (const auto& img : images) {
    if (img.candidate.content_hash.empty()) {
      throw Error(ErrorKind::argument, "image " + img.candidate.id + " has no content hash");
    }
  }

  const std::size_t nq = quiz.questions.size();
  const std::size_t total = images.size() * nq;
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  if (settings.shuffle_seed) {
    std::mt19937_64 rng(*settings.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::vector<AnswerRecord> records(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
      const std::size_t cell = order[k];
      const std::size_t row = cell / nq;
      const std::size_t col = cell % nq;
      records[cell] = administer(quiz.questions[col], col, images[row], gateway, settings);
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(settings.workers, 1, total);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
  }

  MatrixBuild out;
  ScoreMatrix& m = out.matrix;
  m.concept_id = quiz.concept_id;
  m.quiz_kind = quiz.kind;
  m.question_count = nq;
  for (const auto& img : images) {
    m.image_ids.push_back(img.candidate.id);
    m.labels.push_back(img.candidate.label);
  }
  m.cells.reserve(total);
  m.analyses.reserve(total);
  for (std::size_t cell = 0; cell < total; ++cell) {
    m.cells.push_back(grade(records[cell].outcome, quiz.questions[cell % nq]));
    m.analyses.push_back(records[cell].raw_analysis);
  }
  check_complete(m);
  out.all_error = m.all_error();
  out.records = std::move(records);
  return out;
}

std::vector<std::string> grounding_leaks(const modelio::ModelRequest& request,
                                         std::span<const std::string> blocklist) {
  std::vector<std::string> out;
  for (const auto& alias : blocklist) {
    if (text::contains_phrase(request.system_text, alias) ||
        text::contains_phrase(request.user_text, alias)) {
      out.push_back(alias);
    }
  }
  return out;
}

}  // namespace imgquiz::vlmquiz
