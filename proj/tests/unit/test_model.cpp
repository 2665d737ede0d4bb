#include <gtest/gtest.h>

#include <filesystem>

#include "helpers.hpp"
#include "imgquiz/error.hpp"
#include "imgquiz/manifest.hpp"
#include "imgquiz/model.hpp"
#include "imgquiz/serialize.hpp"

using namespace imgquiz;
using testing_support::fixtures;
using testing_support::read_text;

TEST(CanonicalizeOption, Examples) {
  EXPECT_EQ(canonicalize_option("Bronze", 0), "A) Bronze");
  EXPECT_EQ(canonicalize_option("B) Marble", 1), "B) Marble");
  EXPECT_EQ(canonicalize_option("a)  wood ", 3), "D) wood");
}

TEST(CanonicalizeOption, EmptyTextIsValidationError) {
  try {
    canonicalize_option("C)   ", 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
  }
  EXPECT_THROW(canonicalize_option("x", 26), Error);
}

TEST(CanonicalizeOption, Idempotent) {
  for (const char* raw : {"Bronze", " b) Marble", "(C) Iron", "D. Wood", "Half moon"}) {
    for (std::size_t i = 0; i < 5; ++i) {
      const auto once = canonicalize_option(raw, i);
      EXPECT_EQ(canonicalize_option(once, i), once) << raw;
    }
  }
}

TEST(Concept, MakeConceptSatisfiesInvariants) {
  const Concept c = make_concept("David (Donatello)", {{"", "A bronze statue."}, {"Description", "He wears a hat."}},
                                 {"David of Donatello"});
  EXPECT_EQ(c.id, "david-donatello");
  EXPECT_NE(std::find(c.aliases.begin(), c.aliases.end(), c.title), c.aliases.end());
  for (const auto& s : c.sections) EXPECT_NE(c.article_text.find(s.body), std::string::npos);
  EXPECT_NO_THROW(check_invariants(c));
}

TEST(Concept, BrokenInvariantsAreRejected) {
  Concept c = make_concept("Gujia", {{"", "Sweet."}});
  c.aliases.clear();
  EXPECT_THROW(check_invariants(c), Error);
  c = make_concept("Gujia", {{"", "Sweet."}});
  c.sections.push_back({"Extra", "not in the article"});
  EXPECT_THROW(check_invariants(c), Error);
}

TEST(Quiz, ContrastiveNeedsDistractors) {
  Quiz q;
  q.concept_id = "gujia";
  q.kind = QuizKind::contrastive;
  q.questions.push_back({"Stem?", {"A) a", "B) b", "C) c"}, 0, "", QuizKind::contrastive, std::nullopt});
  EXPECT_THROW(check_invariants(q), Error);
  q.distractor_concept_ids = {"chandrakala"};
  EXPECT_NO_THROW(check_invariants(q));
  q.questions[0].origin = QuizKind::base;
  EXPECT_THROW(check_invariants(q), Error);
}

TEST(Quiz, SizeWarningOutsideObservedRange) {
  Quiz q;
  const Question one{"Stem?", {"A) a", "B) b", "C) c"}, 0, "", QuizKind::base, std::nullopt};
  for (int i = 0; i < 3; ++i) q.questions.push_back(one);
  EXPECT_TRUE(q.size_warning());
  q.questions.push_back(one);
  EXPECT_FALSE(q.size_warning());
  while (q.questions.size() < 12) q.questions.push_back(one);
  EXPECT_TRUE(q.size_warning());
}

TEST(Serialize, GujiaQuizDocumentUsesWireFieldNames) {
  const Quiz quiz = parse_quiz(read_text(fixtures() / "corpora" / "valid_quizzes" / "quiz_0.json"));
  const Json doc = quiz_to_json(quiz);
  ASSERT_EQ(doc["questions"].size(), 5u);
  EXPECT_EQ(doc["questions"][0]["question"], "What distinct shape does the sweet dumpling have?");
  EXPECT_EQ(doc["questions"][0]["correct_answer"], "B) Half moon");
  for (const auto& rec : doc["questions"]) {
    for (const char* key : {"question", "options", "correct_answer", "rationale"}) {
      EXPECT_TRUE(rec.contains(key)) << key;
    }
  }
}

TEST(Serialize, EmptyRationaleIsEmittedAsEmptyString) {
  Quiz quiz;
  quiz.concept_id = "x";
  quiz.questions.push_back({"Stem?", {"A) a", "B) b", "C) c"}, 1, "", QuizKind::base, std::nullopt});
  const Json doc = quiz_to_json(quiz);
  ASSERT_TRUE(doc["questions"][0].contains("rationale"));
  EXPECT_EQ(doc["questions"][0]["rationale"], "");
}

TEST(Serialize, ContrastiveRoundTrip) {
  Quiz quiz;
  quiz.concept_id = "gujia";
  quiz.kind = QuizKind::contrastive;
  quiz.distractor_concept_ids = {"chandrakala"};
  quiz.questions.push_back({"What is a key feature of the object in the image?",
                            {"A) Flat round disc outline", "B) Half-moon shaped", "C) Sun-shaped", "D) Clove"},
                            1,
                            "folded",
                            QuizKind::contrastive,
                            std::vector<std::string>{"Half-moon shape"}});
  EXPECT_EQ(parse_quiz(serialize_quiz(quiz)), quiz);
}

TEST(Serialize, CorrectAnswerFallsBackToLetter) {
  const std::vector<std::string> opts{"A) Bronze", "B) Marble", "C) Iron"};
  EXPECT_EQ(resolve_correct_answer("B) Marble", opts), 1u);
  EXPECT_EQ(resolve_correct_answer("Marble", opts), 1u);
  EXPECT_EQ(resolve_correct_answer("C", opts), 2u);
  EXPECT_EQ(resolve_correct_answer("C) Copper", opts), 2u);
  EXPECT_EQ(resolve_correct_answer("Copper", opts), std::nullopt);
  EXPECT_THROW(parse_quiz(R"({"concept_id":"x","kind":"base","questions":[
      {"question":"q","options":["a","b","c"],"correct_answer":"zinc"}]})"),
               Error);
}

TEST(Serialize, MatrixAndRankingRoundTrip) {
  ScoreMatrix m = testing_support::make_matrix({"CIA", "ECC"}, {"x", "y"},
                                               {ImageLabel::target, ImageLabel::distractor});
  m.analyses = {"a", "b", "c", "d", "e", "f"};
  EXPECT_EQ(matrix_from_json(matrix_to_json(m)), m);
  const std::vector<RankedImage> r{{"x", 2, 0.5, 1, 0.7071}, {"y", 1, 0.25, 2, -0.7071}};
  const auto back = ranking_from_tsv(ranking_to_tsv(r));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].image_id, "x");
  EXPECT_EQ(back[1].rank, 2u);
}

TEST(Serialize, MatrixCompletenessEnforced) {
  ScoreMatrix m = testing_support::make_matrix({"CI", "IC"});
  EXPECT_NO_THROW(check_complete(m));
  m.cells.pop_back();
  EXPECT_THROW(check_complete(m), Error);
}

TEST(Manifest, JsonlRoundTrip) {
  RunManifest m("gujia-1", "2026-01-01T00:00:00Z", Json{{"threshold", 2}});
  m.add_stage("ingest", Json{{"images", 2}});
  m.add_warning("contrastive", "no contrast");
  m.bump("cache_hits", 3);
  m.finish("ok", 0, "2026-01-01T00:00:01Z");
  const RunManifest back = RunManifest::from_jsonl(m.to_jsonl());
  EXPECT_EQ(back.to_jsonl(), m.to_jsonl());
  EXPECT_EQ(back.counters().at("cache_hits"), 3u);
  EXPECT_EQ(back.stages("ingest").size(), 1u);
  EXPECT_EQ(back.status(), "ok");
}
