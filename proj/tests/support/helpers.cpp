#include "helpers.hpp"

#include <stdlib.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "imgquiz/modelio.hpp"
#include "imgquiz/wiki.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using namespace imgquiz;

fs::path fixtures() { return IMGQUIZ_FIXTURES_DIR; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& path) { return Json::parse(read_text(path)); }

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "imgquiz-test-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ScoreMatrix make_matrix(const std::vector<std::string>& rows, std::vector<std::string> ids,
                        std::vector<ImageLabel> labels) {
  ScoreMatrix m;
  m.concept_id = "test";
  m.question_count = rows.empty() ? 0 : rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (ids.size() <= i) ids.push_back("img" + std::to_string(i + 1));
    if (labels.size() <= i) labels.push_back(ImageLabel::unknown);
    for (char c : rows[i]) {
      switch (c) {
        case 'C': m.cells.push_back(Cell::correct); break;
        case 'I': m.cells.push_back(Cell::incorrect); break;
        case 'A': m.cells.push_back(Cell::abstain); break;
        default: m.cells.push_back(Cell::error); break;
      }
    }
  }
  m.image_ids = std::move(ids);
  m.labels = std::move(labels);
  return m;
}

ScoreMatrix random_matrix(std::mt19937_64& rng, std::size_t images, std::size_t questions) {
  static constexpr char kCells[] = {'C', 'I', 'A', 'E'};
  std::discrete_distribution<int> pick({5, 4, 1, 0.5});
  std::vector<std::string> rows(images);
  for (auto& row : rows) {
    for (std::size_t q = 0; q < questions; ++q) row.push_back(kCells[pick(rng)]);
  }
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < images; ++i) {
    // two-digit suffixes so lexicographic order differs from insertion order
    ids.push_back("im" + std::to_string((i * 7 + 3) % 97));
  }
  return make_matrix(rows, ids);
}

oracle::Grid correct_grid(const ScoreMatrix& m) {
  oracle::Grid g(m.image_ids.size(), std::vector<int>(m.question_count, 0));
  for (std::size_t i = 0; i < m.image_ids.size(); ++i) {
    for (std::size_t q = 0; q < m.question_count; ++q) g[i][q] = m.at(i, q) == Cell::correct ? 1 : 0;
  }
  return g;
}

service::Services gujia_services(const std::string& script) {
  service::Services s;
  s.wiki_transport = std::make_shared<wiki::FixtureTransport>(fixtures() / "gujia" / "wiki");
  s.backend = std::shared_ptr<modelio::ModelBackend>(modelio::load_script(fixtures() / "gujia" / script));
  s.cache = std::make_shared<modelio::MemoryCache>();
  return s;
}

service::RunConfig gujia_config(const std::string& out) {
  service::RunConfig c;
  c.concept_title = "Gujia";
  c.distractors = {"Chandrakala"};
  c.fixtures = (fixtures() / "gujia").string();
  c.out = out;
  c.clock = kFixedClock;
  return c;
}

std::vector<LoadedImage> gujia_images() {
  wiki::WikiClient client(std::make_shared<wiki::FixtureTransport>(fixtures() / "gujia" / "wiki"));
  std::vector<LoadedImage> out;
  const std::pair<const char*, const char*> wanted[] = {{"Gujia", "Gujia sweet.png"},
                                                        {"Chandrakala", "Chandrakala sweet.png"}};
  for (const auto& [title, file] : wanted) {
    for (auto& c : client.list_candidate_images(title)) {
      if (c.file_name != file) continue;
      c.label = out.empty() ? ImageLabel::target : ImageLabel::distractor;
      out.push_back(client.fetch_image_bytes(c));
    }
  }
  if (out.size() != 2) throw std::runtime_error("Gujia fixture images missing");
  return out;
}

Concept gujia_concept(const std::string& title) {
  wiki::WikiClient client(std::make_shared<wiki::FixtureTransport>(fixtures() / "gujia" / "wiki"));
  return client.fetch_article(title);
}

}  // namespace testing_support
