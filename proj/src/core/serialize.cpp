#include "imgquiz/serialize.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

#include "imgquiz/error.hpp"
#include "imgquiz/text.hpp"

namespace imgquiz {

namespace {

std::string string_field(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

std::optional<std::size_t> letter_of(std::string_view answer) {
  std::string_view t = text::trim(answer);
  if (t.size() >= 3 && t[0] == '(' && t[2] == ')') t = t.substr(1, 1);
  if (t.empty() || !std::isalpha(static_cast<unsigned char>(t[0]))) return std::nullopt;
  if (t.size() == 1 || t[1] == ')' || ((t[1] == '.' || t[1] == ':') &&
                                       (t.size() == 2 || t[2] == ' '))) {
    return static_cast<std::size_t>(std::toupper(static_cast<unsigned char>(t[0])) - 'A');
  }
  return std::nullopt;
}

template <typename T>
std::vector<T> array_field(const Json& obj, const char* key) {
  std::vector<T> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw Error(ErrorKind::parse, std::string("field is not an array: ") + key);
  for (const auto& v : *it) out.push_back(v.get<T>());
  return out;
}

}  // namespace

std::optional<std::size_t> resolve_correct_answer(std::string_view correct_answer,
                                                  std::span<const std::string> options) {
  if (text::trim(correct_answer).empty()) return std::nullopt;
  for (std::size_t i = 0; i < options.size() && i < 26; ++i) {
    try {
      if (text::iequals(canonicalize_option(correct_answer, i), options[i])) return i;
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  if (auto letter = letter_of(correct_answer); letter && *letter < options.size()) return letter;
  return std::nullopt;
}

std::vector<QuestionRecord> parse_question_records(const Json& doc, QuizKind origin) {
  if (!doc.is_array()) throw Error(ErrorKind::parse, "question document is not an array");
  std::vector<QuestionRecord> out;
  for (const auto& item : doc) {
    QuestionRecord rec;
    rec.question.origin = origin;
    if (!item.is_object()) {
      out.push_back(std::move(rec));
      continue;
    }
    rec.question.stem = text::collapse_whitespace(string_field(item, "question"));
    rec.question.rationale = string_field(item, "rationale");
    if (auto it = item.find("options"); it != item.end() && it->is_array()) {
      for (const auto& raw : *it) {
        const std::string s = raw.is_string() ? raw.get<std::string>() : raw.dump();
        try {
          rec.question.options.push_back(canonicalize_option(s, rec.question.options.size()));
        } catch (const Error&) {
          // empty option text, or more than 26 entries
        }
      }
    }
    if (auto it = item.find("source_features"); it != item.end() && it->is_array()) {
      rec.question.source_features = it->get<std::vector<std::string>>();
    }
    rec.raw_correct_answer = string_field(item, "correct_answer");
    rec.correct_index = resolve_correct_answer(rec.raw_correct_answer, rec.question.options);
    rec.question.correct_index = rec.correct_index.value_or(rec.question.options.size());
    out.push_back(std::move(rec));
  }
  return out;
}

Json question_to_json(const Question& q) {
  Json j;
  j["question"] = q.stem;
  j["options"] = q.options;
  j["correct_answer"] = q.correct_index < q.options.size() ? q.options[q.correct_index] : "";
  j["rationale"] = q.rationale;
  if (q.source_features) j["source_features"] = *q.source_features;
  return j;
}

Json quiz_to_json(const Quiz& quiz) {
  Json j;
  j["concept_id"] = quiz.concept_id;
  j["kind"] = std::string(to_string(quiz.kind));
  j["distractor_concept_ids"] = quiz.distractor_concept_ids;
  Json questions = Json::array();
  for (const auto& q : quiz.questions) questions.push_back(question_to_json(q));
  j["questions"] = std::move(questions);
  return j;
}

Quiz quiz_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::parse, "quiz document is not an object");
  Quiz quiz;
  quiz.concept_id = string_field(doc, "concept_id");
  quiz.kind = parse_quiz_kind(string_field(doc, "kind"));
  quiz.distractor_concept_ids = array_field<std::string>(doc, "distractor_concept_ids");
  auto it = doc.find("questions");
  if (it == doc.end()) throw Error(ErrorKind::parse, "quiz document has no questions");
  auto records = parse_question_records(*it, quiz.kind);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].correct_index) {
      throw Error(ErrorKind::parse, "question " + std::to_string(i) +
                                        ": correct_answer matches no option: '" +
                                        records[i].raw_correct_answer + "'");
    }
    quiz.questions.push_back(std::move(records[i].question));
  }
  return quiz;
}

std::string serialize_quiz(const Quiz& quiz) { return quiz_to_json(quiz).dump(2) + "\n"; }

Quiz parse_quiz(std::string_view document) {
  Json doc;
  try {
    doc = Json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("quiz document: ") + e.what());
  }
  return quiz_from_json(doc);
}

Json concept_to_json(const Concept& c) {
  Json j;
  j["id"] = c.id;
  j["title"] = c.title;
  j["aliases"] = c.aliases;
  j["article_text"] = c.article_text;
  Json sections = Json::array();
  for (const auto& s : c.sections) sections.push_back({{"heading", s.heading}, {"body", s.body}});
  j["sections"] = std::move(sections);
  j["category"] = c.category ? Json(*c.category) : Json(nullptr);
  j["categories"] = c.categories;
  j["links"] = c.links;
  return j;
}

Concept concept_from_json(const Json& doc) {
  Concept c;
  c.id = string_field(doc, "id");
  c.title = string_field(doc, "title");
  c.aliases = array_field<std::string>(doc, "aliases");
  c.article_text = string_field(doc, "article_text");
  if (auto it = doc.find("sections"); it != doc.end()) {
    for (const auto& s : *it) c.sections.push_back({string_field(s, "heading"), string_field(s, "body")});
  }
  if (auto it = doc.find("category"); it != doc.end() && it->is_string()) c.category = it->get<std::string>();
  c.categories = array_field<std::string>(doc, "categories");
  c.links = array_field<std::string>(doc, "links");
  return c;
}

Json candidate_to_json(const ImageCandidate& c) {
  auto opt = [](const auto& o) { return o ? Json(*o) : Json(nullptr); };
  Json j;
  j["id"] = c.id;
  j["file_name"] = c.file_name;
  j["source_url"] = opt(c.source_url);
  j["thumb_url"] = opt(c.thumb_url);
  j["byte_size"] = opt(c.byte_size);
  j["media_type"] = opt(c.media_type);
  j["content_hash"] = c.content_hash;
  j["usage_count"] = c.usage_count;
  j["upload_date"] = opt(c.upload_date);
  j["label"] = std::string(to_string(c.label));
  return j;
}

ImageCandidate candidate_from_json(const Json& doc) {
  auto opt_str = [&](const char* key) -> std::optional<std::string> {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };
  ImageCandidate c;
  c.id = string_field(doc, "id");
  c.file_name = string_field(doc, "file_name");
  c.source_url = opt_str("source_url");
  c.thumb_url = opt_str("thumb_url");
  if (auto it = doc.find("byte_size"); it != doc.end() && it->is_number()) {
    c.byte_size = it->get<std::uint64_t>();
  }
  c.media_type = opt_str("media_type");
  c.content_hash = string_field(doc, "content_hash");
  c.usage_count = doc.value("usage_count", std::uint64_t{0});
  c.upload_date = opt_str("upload_date");
  c.label = parse_image_label(doc.value("label", std::string("unknown")));
  return c;
}

Json matrix_to_json(const ScoreMatrix& m) {
  Json j;
  j["concept_id"] = m.concept_id;
  j["quiz_kind"] = std::string(to_string(m.quiz_kind));
  j["question_count"] = m.question_count;
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.image_ids.size(); ++i) {
    Json row;
    row["image_id"] = m.image_ids[i];
    row["label"] = std::string(to_string(i < m.labels.size() ? m.labels[i] : ImageLabel::unknown));
    Json cells = Json::array();
    Json analyses = Json::array();
    for (std::size_t q = 0; q < m.question_count; ++q) {
      const std::size_t k = i * m.question_count + q;
      cells.push_back(k < m.cells.size() ? std::string(to_string(m.cells[k])) : "missing");
      if (k < m.analyses.size()) analyses.push_back(m.analyses[k]);
    }
    row["cells"] = std::move(cells);
    if (!m.analyses.empty()) row["analyses"] = std::move(analyses);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

ScoreMatrix matrix_from_json(const Json& doc) {
  ScoreMatrix m;
  m.concept_id = string_field(doc, "concept_id");
  m.quiz_kind = parse_quiz_kind(string_field(doc, "quiz_kind"));
  m.question_count = doc.value("question_count", std::size_t{0});
  bool any_analyses = false;
  const auto rows = doc.value("rows", Json::array());
  for (const auto& row : rows) any_analyses = any_analyses || row.contains("analyses");
  for (const auto& row : rows) {
    m.image_ids.push_back(string_field(row, "image_id"));
    m.labels.push_back(parse_image_label(row.value("label", std::string("unknown"))));
    const auto cells = row.value("cells", Json::array());
    if (cells.size() != m.question_count) {
      throw Error(ErrorKind::validation, "matrix row for " + m.image_ids.back() + " has " +
                                             std::to_string(cells.size()) + " cells, expected " +
                                             std::to_string(m.question_count));
    }
    for (const auto& c : cells) m.cells.push_back(parse_cell(c.get<std::string>()));
    if (any_analyses) {
      auto analyses = row.value("analyses", Json::array());
      for (std::size_t q = 0; q < m.question_count; ++q) {
        m.analyses.push_back(q < analyses.size() ? analyses[q].get<std::string>() : "");
      }
    }
  }
  check_complete(m);
  return m;
}

Json contrast_to_json(const FeatureContrast& f) {
  Json j;
  j["distinct_to_target"] = f.distinct_to_target;
  j["distinct_to_distractor"] = f.distinct_to_distractor;
  j["common"] = f.common;
  return j;
}

FeatureContrast contrast_from_json(const Json& doc) {
  return {array_field<std::string>(doc, "distinct_to_target"),
          array_field<std::string>(doc, "distinct_to_distractor"),
          array_field<std::string>(doc, "common")};
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string ranking_to_tsv(std::span<const RankedImage> ranking) {
  std::string out = "image_id\tcorrect\tscore\trank\tz_score\n";
  for (const auto& r : ranking) {
    out += r.image_id + "\t" + std::to_string(r.correct) + "\t" + format_real(r.score) + "\t" +
           std::to_string(r.rank) + "\t" + format_real(r.z_score) + "\n";
  }
  return out;
}

std::vector<RankedImage> ranking_from_tsv(std::string_view tsv) {
  std::vector<RankedImage> out;
  auto lines = text::split_lines(tsv);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::istringstream in(lines[i]);
    RankedImage r;
    std::string score, z;
    if (!std::getline(in, r.image_id, '\t')) throw Error(ErrorKind::parse, "bad ranking row");
    in >> r.correct >> score >> r.rank >> z;
    if (!in) throw Error(ErrorKind::parse, "bad ranking row: " + lines[i]);
    r.score = std::stod(score);
    r.z_score = std::stod(z);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace imgquiz
