#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "imgquiz/config.hpp"
#include "imgquiz/model.hpp"
#include "imgquiz/pipeline.hpp"
#include "imgquiz/serialize.hpp"
#include "oracles.hpp"

namespace testing_support {

std::filesystem::path fixtures();
std::string read_text(const std::filesystem::path& path);
imgquiz::Json read_json(const std::filesystem::path& path);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

// One string per image; 'C' correct, 'I' incorrect, 'A' abstain, 'E' error.
// Ids default to img1..imgN, labels to unknown.
imgquiz::ScoreMatrix make_matrix(const std::vector<std::string>& rows,
                                 std::vector<std::string> ids = {},
                                 std::vector<imgquiz::ImageLabel> labels = {});

imgquiz::ScoreMatrix random_matrix(std::mt19937_64& rng, std::size_t images, std::size_t questions);

oracle::Grid correct_grid(const imgquiz::ScoreMatrix& m);

// Fixture-mode services for the Gujia case: recorded wiki responses plus the
// named model script.
imgquiz::service::Services gujia_services(const std::string& script = "model_script.json");
imgquiz::service::RunConfig gujia_config(const std::string& out);

// Target image then distractor image, bytes loaded from the Gujia fixtures.
std::vector<imgquiz::LoadedImage> gujia_images();
imgquiz::Concept gujia_concept(const std::string& title);

inline constexpr const char* kFixedClock = "2026-01-01T00:00:00Z";

}  // namespace testing_support
