#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "imgquiz/error.hpp"
#include "imgquiz/ranking.hpp"
#include "imgquiz/serialize.hpp"

using namespace imgquiz;
using testing_support::make_matrix;

namespace {
constexpr auto T = ImageLabel::target;
constexpr auto D = ImageLabel::distractor;
}  // namespace

TEST(RankImages, ContrastiveGujiaMatrix) {
  const auto m = make_matrix({"CCCC", "IIII"}, {"Gujia sweet.png", "Chandrakala sweet.png"});
  const auto r = ranking::rank_images(m);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].image_id, "Gujia sweet.png");
  EXPECT_EQ(r[0].rank, 1u);
  EXPECT_EQ(r[0].score, 1.0);
  EXPECT_EQ(r[1].score, 0.0);
  EXPECT_EQ(r[1].rank, 2u);
}

TEST(RankImages, IdenticalRowsTieBreakOnId) {
  const auto r = ranking::rank_images(make_matrix({"CIC", "CIC"}, {"zeta", "alpha"}));
  EXPECT_EQ(r[0].image_id, "alpha");
  EXPECT_EQ(r[1].image_id, "zeta");
  EXPECT_EQ(r[0].score, r[1].score);
  EXPECT_EQ(r[0].z_score, 0.0);
}

TEST(RankImages, AbstainAndErrorAreNotCorrect) {
  const auto r = ranking::rank_images(make_matrix({"CAE", "CII"}));
  EXPECT_EQ(r[0].correct, 1u);
  EXPECT_EQ(r[1].correct, 1u);
}

TEST(RankImages, EmptyAndIncompleteMatrices) {
  ScoreMatrix empty;
  empty.question_count = 3;
  EXPECT_TRUE(ranking::rank_images(empty).empty());
  auto m = make_matrix({"CC", "CI"});
  m.cells.pop_back();
  EXPECT_THROW(ranking::rank_images(m), Error);
}

TEST(ZScores, Examples) {
  EXPECT_EQ(ranking::zscores(std::vector<double>{0.5, 0.5, 0.5}), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(ranking::zscores(std::vector<double>{1, 2, 3}), (std::vector<double>{-1, 0, 1}));
  EXPECT_EQ(ranking::zscores(std::vector<double>{0.2}), (std::vector<double>{0}));
}

TEST(Popularity, ExactDecades) {
  EXPECT_EQ(ranking::popularity(0), 0.0);
  EXPECT_EQ(ranking::popularity(9), 1.0);
  EXPECT_EQ(ranking::popularity(99), 2.0);
  EXPECT_NEAR(ranking::popularity(1016), std::log10(1017.0), 1e-15);
}

TEST(Trigger, Examples) {
  const auto gujia = make_matrix({"CICAC", "IICCI"}, {"g", "c"}, {T, D});
  const auto t = ranking::should_trigger_contrastive(gujia, 2);
  EXPECT_TRUE(t.triggered);
  EXPECT_EQ(t.best_target_correct, 3u);
  EXPECT_EQ(t.best_distractor_correct, 2u);

  EXPECT_FALSE(ranking::should_trigger_contrastive(make_matrix({"CCCCC", "IIIII"}, {}, {T, D}), 2).triggered);
  EXPECT_TRUE(ranking::should_trigger_contrastive(make_matrix({"CCCC", "CCII"}, {}, {T, D}), 2).triggered);
  EXPECT_FALSE(ranking::should_trigger_contrastive(make_matrix({"CCCC", "CIII"}, {}, {T, D}), 2).triggered);
}

TEST(Trigger, UsesBestOfEachClass) {
  const auto m = make_matrix({"IIII", "CCCC", "CIII", "CCII"}, {"t1", "t2", "d1", "d2"}, {T, T, D, D});
  const auto t = ranking::should_trigger_contrastive(m, 1);
  EXPECT_EQ(t.best_target_image, "t2");
  EXPECT_EQ(t.best_distractor_image, "d2");
  EXPECT_FALSE(t.triggered);
}

TEST(Trigger, MissingLabelClass) {
  try {
    ranking::should_trigger_contrastive(make_matrix({"CC", "CI"}, {}, {T, T}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::labeling);
  }
}

TEST(Bundle, Examples) {
  EXPECT_EQ(ranking::select_bundle(make_matrix({"CCI", "IIC"}), 2), (std::vector<std::string>{"img1", "img2"}));
  EXPECT_EQ(ranking::select_bundle(make_matrix({"CCCC", "CIII", "IICI"}), 3), (std::vector<std::string>{"img1"}));
  EXPECT_EQ(ranking::select_bundle(make_matrix({"CCCI", "IICC", "IIIC"}), 2),
            (std::vector<std::string>{"img1", "img2"}));
}

TEST(Bundle, TieBreakAndBudget) {
  EXPECT_EQ(ranking::select_bundle(make_matrix({"CI", "CI"}, {"b", "a"}), 1), (std::vector<std::string>{"a"}));
  EXPECT_EQ(ranking::select_bundle(make_matrix({"CII", "ICI", "IIC"}), 2).size(), 2u);
  EXPECT_TRUE(ranking::select_bundle(make_matrix({"III", "AEI"}), 2).empty());
}

TEST(Bundle, MatchesBruteForceOnSmallForcedCase) {
  const auto m = make_matrix({"CCCI", "IICC", "IIIC"});
  const auto picks = ranking::select_bundle(m, 2);
  std::vector<std::size_t> rows;
  for (const auto& id : picks) rows.push_back(std::stoul(id.substr(3)) - 1);
  EXPECT_EQ(oracle::coverage(testing_support::correct_grid(m), rows),
            oracle::best_coverage(testing_support::correct_grid(m), 2));
}

TEST(Ablation, FullSizeIsExactlyOne) {
  const auto m = matrix_from_json(testing_support::read_json(testing_support::fixtures() / "corpora" / "matrix_10q.json"));
  ASSERT_EQ(m.question_count, 10u);
  const std::vector<std::size_t> sizes{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
  const auto curve = ranking::ablate_quiz_size(m, sizes, 50, 3);
  ASSERT_EQ(curve.mean_spearman.size(), 10u);
  EXPECT_EQ(curve.mean_spearman[0], 1.0);
  for (double v : curve.mean_spearman) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Ablation, SeededRunsAreIdentical) {
  const auto m = matrix_from_json(testing_support::read_json(testing_support::fixtures() / "corpora" / "matrix_10q.json"));
  const std::vector<std::size_t> sizes{7, 3};
  EXPECT_EQ(ranking::stability_to_tsv(ranking::ablate_quiz_size(m, sizes, 40, 11)),
            ranking::stability_to_tsv(ranking::ablate_quiz_size(m, sizes, 40, 11)));
}

TEST(Ablation, DegenerateTiesReportOne) {
  const auto m = make_matrix({"CICI", "CICI", "CICI"});
  const std::vector<std::size_t> sizes{1, 2, 3};
  for (double v : ranking::ablate_quiz_size_exhaustive(m, sizes).mean_spearman) EXPECT_EQ(v, 1.0);
}

TEST(Ablation, ExhaustiveMatchesOracle) {
  const auto m = make_matrix({"CCIC", "CIIA", "ICCI"}, {"a", "b", "c"});
  const std::vector<std::size_t> sizes{4, 3, 2, 1};
  const auto curve = ranking::ablate_quiz_size_exhaustive(m, sizes);
  EXPECT_EQ(curve.repetitions, 0u);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    EXPECT_NEAR(curve.mean_spearman[k],
                oracle::exhaustive_stability(testing_support::correct_grid(m), m.image_ids, sizes[k]), 1e-9)
        << "size " << sizes[k];
  }
}

TEST(Ablation, InvalidSizes) {
  const auto m = make_matrix({"CC", "CI"});
  const std::vector<std::size_t> zero{0}, big{3};
  EXPECT_THROW(ranking::ablate_quiz_size(m, zero, 5, 0), Error);
  EXPECT_THROW(ranking::ablate_quiz_size(m, big, 5, 0), Error);
  const std::vector<std::size_t> ok{1};
  EXPECT_THROW(ranking::ablate_quiz_size(m, ok, 0, 0), Error);
}

TEST(RankAgreement, DegenerateConvention) {
  const std::vector<std::string> ids{"a", "b", "c"};
  EXPECT_EQ(ranking::rank_agreement(std::vector<double>{1, 1, 1}, std::vector<double>{2, 2, 2}, ids), 1.0);
  EXPECT_EQ(ranking::rank_agreement(std::vector<double>{1, 1, 1}, std::vector<double>{0, 1, 0}, ids), 0.0);
  EXPECT_EQ(ranking::rank_agreement(std::vector<double>{3, 2, 1}, std::vector<double>{1, 1, 1}, ids), 1.0);
}
