#include "imgquiz/quizgen.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "imgquiz/error.hpp"
#include "imgquiz/prompts.hpp"
#include "imgquiz/text.hpp"

namespace imgquiz::quizgen {

namespace {

constexpr std::string_view kRetryNote =
    "\n\nYour previous answer could not be used. Return the questions as a JSON array "
    "exactly in the format shown above.";

struct Attempt {
  std::string raw;
  bool parsed = false;
  std::vector<Question> accepted;
  std::vector<ValidationReport> rejected;
  std::optional<FeatureContrast> contrast;
};

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",  "an", "the", "of", "with", "and", "or",   "in", "on", "to", "from", "for",
      "is", "are", "like", "that", "it", "its", "by", "as", "at", "into", "has", "have"};
  return words;
}

// Crude suffix folding: "circles" and "circle", "rounded" and "round" compare equal.
std::string stem(std::string t) {
  auto ends = [&](std::string_view suf) { return t.size() >= suf.size() && t.ends_with(suf); };
  if (t.size() > 3 && ends("s") && !ends("ss")) t.pop_back();
  if (t.size() > 5 && ends("ing")) {
    t.resize(t.size() - 3);
  } else if (t.size() > 4 && ends("ed")) {
    t.resize(t.size() - 2);
  }
  if (t.size() > 4 && ends("e")) t.pop_back();
  return t;
}

std::set<std::string> content_tokens(std::string_view s) {
  std::set<std::string> out;
  for (auto& t : text::tokens(s)) {
    if (!stopwords().count(t)) out.insert(stem(std::move(t)));
  }
  return out;
}

double overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : a) shared += b.count(t);
  return static_cast<double>(shared) / static_cast<double>(std::min(a.size(), b.size()));
}

// Strips list markers, brackets and emphasis from a feature line.
std::optional<std::string> feature_item(std::string_view line) {
  const bool indented = !line.empty() && std::isspace(static_cast<unsigned char>(line.front()));
  std::string_view s = text::trim(line);
  if (s.empty()) return std::nullopt;
  if (s.size() >= 2 && std::isalpha(static_cast<unsigned char>(s[0])) && (s[1] == '.' || s[1] == ')') &&
      (s.size() == 2 || s[2] == ' ')) {
    s.remove_prefix(2);
  } else if (s[0] == '-' || s[0] == '*') {
    s.remove_prefix(1);
  } else if (s.starts_with("\xE2\x80\xA2")) {
    s.remove_prefix(3);
  } else if (indented && std::isdigit(static_cast<unsigned char>(s[0]))) {
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size() || (s[i] != '.' && s[i] != ')')) return std::nullopt;
    s.remove_prefix(i + 1);
  } else {
    return std::nullopt;
  }
  std::string item;
  for (char c : s) {
    if (c != '[' && c != ']' && c != '*' && c != '`') item.push_back(c);
  }
  item = text::collapse_whitespace(item);
  if (item.empty()) return std::nullopt;
  return item;
}

enum class Heading { none, target, distractor, common };

Heading classify_heading(std::string_view line) {
  const std::string l = text::fold(line);
  if (l.empty()) return Heading::none;
  if (l.find("in common") != std::string::npos || l.find("common features") != std::string::npos ||
      l.find("both a and b") != std::string::npos) {
    return Heading::common;
  }
  const bool distinct = l.find("distinct") != std::string::npos || l.find("unique") != std::string::npos;
  if (distinct && (l.find("to a") != std::string::npos || l.find("object a") != std::string::npos ||
                   l.ends_with(" a"))) {
    return Heading::target;
  }
  if (distinct && (l.find("to b") != std::string::npos || l.find("object b") != std::string::npos ||
                   l.ends_with(" b"))) {
    return Heading::distractor;
  }
  return Heading::none;
}

std::string describe(const Concept& c, std::span<const std::string> allowlist) {
  return extract_visual_sections(c, allowlist).text;
}

modelio::ModelRequest text_request(const GenerationSettings& settings, std::string user_text) {
  modelio::ModelRequest req;
  req.model_id = settings.model_id;
  req.user_text = std::move(user_text);
  req.decode = settings.decode;
  return req;
}

void screen(Attempt& attempt, const Json& doc, QuizKind origin,
            std::span<const std::string> blocklist, const FeatureContrast* contrast) {
  const auto records = parse_question_records(doc, origin);
  attempt.parsed = true;
  for (std::size_t i = 0; i < records.size(); ++i) {
    Question q = records[i].question;
    ValidationReport report = validate_question(q, blocklist, i);
    if (contrast) {
      if (report.accepted() && has_conflicting_choice(q, *contrast)) {
        report.violations.push_back(Violation::conflicting_choice);
      }
      std::string feature;
      if (report.accepted() &&
          classify_option(option_body(q.options[q.correct_index]), *contrast, &feature) ==
              FeatureSide::target) {
        q.source_features = std::vector<std::string>{feature};
      }
    }
    if (report.accepted()) {
      attempt.accepted.push_back(std::move(q));
    } else {
      attempt.rejected.push_back(std::move(report));
    }
  }
}

}  // namespace

std::vector<ValidationReport> validate_document(const Json& doc, std::span<const std::string> blocklist) {
  const Json* records = &doc;
  if (doc.is_object() && doc.contains("questions")) records = &doc["questions"];
  std::vector<ValidationReport> out;
  std::size_t i = 0;
  for (const auto& rec : parse_question_records(*records, QuizKind::base)) {
    out.push_back(validate_question(rec.question, blocklist, i++));
  }
  return out;
}

namespace {

// Picks the attempt with the most surviving questions; earlier wins ties.
const Attempt& best_attempt(const std::vector<Attempt>& attempts) {
  const Attempt* best = nullptr;
  for (const auto& a : attempts) {
    if (!a.parsed) continue;
    if (!best || a.accepted.size() > best->accepted.size()) best = &a;
  }
  if (!best) {
    throw GenerationError("model output held no usable question document after " +
                              std::to_string(attempts.size()) + " attempts",
                          attempts.back().raw);
  }
  if (best->accepted.empty()) {
    throw Error(ErrorKind::empty_quiz, "no generated question passed validation");
  }
  return *best;
}

QuizBuild assemble(const std::vector<Attempt>& attempts, Quiz quiz) {
  const Attempt& best = best_attempt(attempts);
  QuizBuild build;
  quiz.questions = best.accepted;
  build.quiz = std::move(quiz);
  build.rejected = best.rejected;
  build.contrast = best.contrast;
  build.model_calls = static_cast<int>(attempts.size());
  for (const auto& a : attempts) build.raw_outputs.push_back(a.raw);
  return build;
}

}  // namespace

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::leak: return "leak";
    case Violation::duplicate_option: return "duplicate_option";
    case Violation::bad_correct_answer: return "bad_correct_answer";
    case Violation::option_count: return "option_count";
    case Violation::empty_stem: return "empty_stem";
    case Violation::conflicting_choice: return "conflicting_choice";
  }
  return "unknown";
}

bool ValidationReport::has(Violation v) const {
  return std::find(violations.begin(), violations.end(), v) != violations.end();
}

const std::vector<std::string>& default_section_allowlist() {
  static const std::vector<std::string> list = {"Appearance", "Characteristics", "Design",
                                                "Architecture", "Description", "Details"};
  return list;
}

VisualText extract_visual_sections(const Concept& subject,
                                   std::span<const std::string> section_allowlist) {
  VisualText out;
  for (const auto& section : subject.sections) {
    if (section.heading.empty()) continue;
    const std::string heading = text::to_lower(section.heading);
    const bool match = std::any_of(section_allowlist.begin(), section_allowlist.end(),
                                   [&](const std::string& pattern) {
                                     return !pattern.empty() &&
                                            heading.find(text::to_lower(pattern)) != std::string::npos;
                                   });
    if (!match) continue;
    if (!out.text.empty()) out.text.append("\n\n");
    out.text.append(section.body);
  }
  if (out.text.empty()) {
    out.text = subject.article_text;
    out.fallback = true;
  }
  return out;
}

std::vector<std::string> alias_blocklist(const Concept& subject) {
  std::vector<std::string> out;
  auto add = [&](std::string s) {
    s = text::fold(s);
    if (!s.empty() && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  };
  std::vector<std::string> names = subject.aliases;
  names.push_back(subject.title);
  for (const auto& name : names) {
    add(name);
    // "David (Donatello)" -> "David"
    if (auto open = name.find('('); open != std::string::npos && open > 0) add(name.substr(0, open));
    // "Chandra-kala" -> "chandrakala"
    std::string joined;
    for (char c : text::fold(name)) {
      if (c != ' ') joined.push_back(c);
    }
    add(joined);
  }
  return out;
}

ValidationReport validate_question(const Question& q, const Concept& subject,
                                   std::size_t question_index) {
  const auto blocklist = alias_blocklist(subject);
  return validate_question(q, blocklist, question_index);
}

ValidationReport validate_question(const Question& q, std::span<const std::string> blocklist,
                                   std::size_t question_index) {
  ValidationReport report;
  report.question_index = question_index;

  auto leaks = [&](std::string_view s) {
    return std::any_of(blocklist.begin(), blocklist.end(),
                       [&](const std::string& alias) { return text::contains_phrase(s, alias); });
  };
  bool leak = leaks(q.stem);
  for (const auto& opt : q.options) leak = leak || leaks(option_body(opt));
  if (leak) report.violations.push_back(Violation::leak);

  std::set<std::string> keys;
  for (const auto& opt : q.options) {
    if (!keys.insert(option_key(opt)).second) {
      report.violations.push_back(Violation::duplicate_option);
      break;
    }
  }
  if (q.correct_index >= q.options.size()) report.violations.push_back(Violation::bad_correct_answer);
  if (q.options.size() < kMinOptions || q.options.size() > kMaxOptions) {
    report.violations.push_back(Violation::option_count);
  }
  if (text::trim(q.stem).empty()) report.violations.push_back(Violation::empty_stem);
  return report;
}

std::vector<Json> find_json_documents(std::string_view text) {
  std::vector<Json> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '[' && text[i] != '{') {
      ++i;
      continue;
    }
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t j = i; j < text.size(); ++j) {
      const char c = text[j];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '[' || c == '{') ++depth;
      else if (c == ']' || c == '}') {
        if (--depth == 0) {
          end = j;
          break;
        }
      }
    }
    if (end != std::string_view::npos) {
      try {
        out.push_back(Json::parse(text.substr(i, end - i + 1)));
        i = end + 1;
        continue;
      } catch (const nlohmann::json::parse_error&) {
      }
    }
    ++i;
  }
  return out;
}

std::optional<Json> extract_question_array(std::string_view text) {
  auto is_record_array = [](const Json& j) {
    return j.is_array() && !j.empty() &&
           std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_object(); });
  };
  for (auto& doc : find_json_documents(text)) {
    if (is_record_array(doc)) return doc;
    if (doc.is_object() && doc.contains("questions") && is_record_array(doc["questions"])) {
      return doc["questions"];
    }
  }
  return std::nullopt;
}

QuizBuild generate_base_quiz(const Concept& subject, modelio::Gateway& gateway,
                             const GenerationSettings& settings) {
  if (text::trim(subject.article_text).empty()) {
    throw Error(ErrorKind::argument, "concept " + subject.id + " has no article text");
  }
  const VisualText visual = extract_visual_sections(subject, settings.section_allowlist);
  const auto blocklist = alias_blocklist(subject);
  const std::string prompt = prompts::render_question_generation(visual.text);

  std::vector<Attempt> attempts;
  for (int call = 0; call < 2; ++call) {
    Attempt a;
    a.raw = gateway.complete(text_request(settings, call == 0 ? prompt : prompt + std::string(kRetryNote))).text;
    if (auto doc = extract_question_array(a.raw)) screen(a, *doc, QuizKind::base, blocklist, nullptr);
    const bool good = a.parsed && a.accepted.size() >= settings.surviving_floor;
    attempts.push_back(std::move(a));
    if (good) break;
  }
  Quiz quiz;
  quiz.concept_id = subject.id;
  quiz.kind = QuizKind::base;
  QuizBuild build = assemble(attempts, std::move(quiz));
  build.used_full_article = visual.fallback;
  return build;
}

FeatureContrast parse_feature_contrast(std::string_view response) {
  std::vector<std::string> lists[3];
  bool seen[3] = {false, false, false};
  int current = -1;
  for (const auto& line : text::split_lines(response)) {
    const Heading h = classify_heading(line);
    if (h != Heading::none && !feature_item(line).has_value()) {
      current = h == Heading::target ? 0 : h == Heading::distractor ? 1 : 2;
      seen[current] = true;
      continue;
    }
    if (current < 0) continue;
    if (text::trim(line).empty()) continue;
    if (auto item = feature_item(line)) {
      // "(set 1) Features distinct to A:" style headings can also look like items
      if (classify_heading(*item) != Heading::none) {
        current = classify_heading(*item) == Heading::target ? 0
                  : classify_heading(*item) == Heading::distractor ? 1 : 2;
        seen[current] = true;
        continue;
      }
      if (*item != "..." && *item != "…") lists[current].push_back(*item);
      continue;
    }
    current = -1;  // prose ends the list
  }
  if (!seen[0] || !seen[1] || !seen[2]) {
    throw Error(ErrorKind::parse, "feature comparison is missing one of the three feature lists");
  }

  auto dedupe = [](std::vector<std::string>& v) {
    std::set<std::string> keys;
    std::vector<std::string> out;
    for (auto& f : v) {
      if (keys.insert(text::fold(f)).second) out.push_back(std::move(f));
    }
    v = std::move(out);
  };
  for (auto& l : lists) dedupe(l);

  auto keys_of = [](const std::vector<std::string>& v) {
    std::set<std::string> k;
    for (const auto& f : v) k.insert(text::fold(f));
    return k;
  };
  const auto target_keys = keys_of(lists[0]);
  const auto distractor_keys = keys_of(lists[1]);
  const auto common_keys = keys_of(lists[2]);

  FeatureContrast out;
  for (auto& f : lists[0]) {
    const auto k = text::fold(f);
    if (!distractor_keys.count(k) && !common_keys.count(k)) out.distinct_to_target.push_back(f);
  }
  for (auto& f : lists[1]) {
    const auto k = text::fold(f);
    if (!target_keys.count(k) && !common_keys.count(k)) out.distinct_to_distractor.push_back(f);
  }
  out.common = lists[2];
  return out;
}

FeatureContrast contrast_features(const Concept& target, std::span<const Concept> distractors,
                                  modelio::Gateway& gateway, const GenerationSettings& settings) {
  if (distractors.empty()) throw Error(ErrorKind::argument, "contrast needs at least one distractor");
  std::string others;
  for (const auto& d : distractors) {
    if (!others.empty()) others.append("\n\n");
    others.append(describe(d, settings.section_allowlist));
  }
  const std::string prompt =
      prompts::render_comparative(describe(target, settings.section_allowlist), others);
  return parse_feature_contrast(gateway.complete(text_request(settings, prompt)).text);
}

FeatureSide classify_option(std::string_view option_text, const FeatureContrast& contrast,
                            std::string* matched_feature) {
  constexpr double kThreshold = 0.5;
  const auto option_tokens = content_tokens(option_text);
  FeatureSide best_side = FeatureSide::none;
  double best = 0.0;
  bool tied = false;
  const std::pair<const std::vector<std::string>*, FeatureSide> lists[] = {
      {&contrast.distinct_to_target, FeatureSide::target},
      {&contrast.distinct_to_distractor, FeatureSide::distractor},
      {&contrast.common, FeatureSide::common}};
  std::string best_feature;
  for (const auto& [list, side] : lists) {
    for (const auto& feature : *list) {
      const double score = overlap(option_tokens, content_tokens(feature));
      if (score < kThreshold) continue;
      if (score > best) {
        best = score;
        best_side = side;
        best_feature = feature;
        tied = false;
      } else if (score == best && side != best_side) {
        tied = true;
      }
    }
  }
  if (tied) return FeatureSide::none;
  if (matched_feature && best_side != FeatureSide::none) *matched_feature = best_feature;
  return best_side;
}

bool has_conflicting_choice(const Question& q, const FeatureContrast& contrast) {
  if (q.correct_index >= q.options.size()) return false;
  bool all_common = !q.options.empty();
  for (std::size_t i = 0; i < q.options.size(); ++i) {
    const FeatureSide side = classify_option(option_body(q.options[i]), contrast);
    all_common = all_common && side == FeatureSide::common;
    if (i == q.correct_index) {
      if (side == FeatureSide::distractor || side == FeatureSide::common) return true;
    } else if (side == FeatureSide::target) {
      return true;
    }
  }
  return all_common;
}

QuizBuild generate_contrastive_quiz(const Concept& target, std::span<const Concept> distractors,
                                    modelio::Gateway& gateway, const GenerationSettings& settings) {
  if (distractors.empty()) throw Error(ErrorKind::argument, "contrastive quiz needs a distractor");
  std::string others;
  std::vector<std::string> blocklist = alias_blocklist(target);
  for (const auto& d : distractors) {
    if (!others.empty()) others.append("\n\n");
    others.append(describe(d, settings.section_allowlist));
    for (auto& alias : alias_blocklist(d)) blocklist.push_back(std::move(alias));
  }
  const std::string prompt =
      prompts::render_comparative(describe(target, settings.section_allowlist), others);

  std::vector<Attempt> attempts;
  for (int call = 0; call < 2; ++call) {
    Attempt a;
    a.raw = gateway.complete(text_request(settings, call == 0 ? prompt : prompt + std::string(kRetryNote))).text;
    try {
      a.contrast = parse_feature_contrast(a.raw);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::parse) throw;
    }
    if (a.contrast) {
      if (a.contrast->distinct_to_target.empty()) {
        throw Error(ErrorKind::no_contrast,
                    "no visual feature distinguishes " + target.title + " from the distractors");
      }
      if (auto doc = extract_question_array(a.raw)) {
        screen(a, *doc, QuizKind::contrastive, blocklist, &*a.contrast);
      }
    }
    const bool good = a.parsed && a.accepted.size() >= settings.surviving_floor;
    attempts.push_back(std::move(a));
    if (good) break;
  }
  Quiz quiz;
  quiz.concept_id = target.id;
  quiz.kind = QuizKind::contrastive;
  for (const auto& d : distractors) quiz.distractor_concept_ids.push_back(d.id);
  return assemble(attempts, std::move(quiz));
}

}  // namespace imgquiz::quizgen
