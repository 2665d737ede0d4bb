#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "imgquiz/commands.hpp"
#include "imgquiz/config.hpp"
#include "imgquiz/error.hpp"
#include "imgquiz/quizgen.hpp"
#include "imgquiz/ranking.hpp"
#include "imgquiz/serialize.hpp"
#include "imgquiz/stats.hpp"
#include "imgquiz/vlmquiz.hpp"

namespace py = pybind11;
using namespace imgquiz;

namespace {

// Complex values cross the boundary as JSON text; the Python package wraps
// these in dict-friendly helpers.

ScoreMatrix matrix_arg(const std::string& json) { return matrix_from_json(Json::parse(json)); }

py::dict ranked_dict(const RankedImage& r) {
  py::dict d;
  d["image_id"] = r.image_id;
  d["correct"] = r.correct;
  d["score"] = r.score;
  d["rank"] = r.rank;
  d["z_score"] = r.z_score;
  return d;
}

py::dict test_dict(const stats::TestResult& t) {
  py::dict d;
  d["statistic"] = t.statistic;
  d["df1"] = t.df1;
  d["df2"] = t.df2;
  d["p_value"] = t.p_value;
  return d;
}

std::string outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::selected: return "selected";
    case OutcomeKind::abstain: return "abstain";
    case OutcomeKind::parse_failure: return "parse_failure";
    case OutcomeKind::error: return "error";
  }
  return "error";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::module_::import("imgquiz._core").attr("Error")(e.what());
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(err.get_type().ptr(), err.ptr());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("rank_images", [](const std::string& matrix) {
    py::list out;
    for (const auto& r : ranking::rank_images(matrix_arg(matrix))) out.append(ranked_dict(r));
    return out;
  });
  m.def("zscores", [](const std::vector<double>& xs) { return ranking::zscores(xs); });
  m.def("popularity", &ranking::popularity);
  m.def(
      "should_trigger_contrastive",
      [](const std::string& matrix, int threshold) {
        const auto t = ranking::should_trigger_contrastive(matrix_arg(matrix), threshold);
        py::dict d;
        d["triggered"] = t.triggered;
        d["best_target_correct"] = t.best_target_correct;
        d["best_distractor_correct"] = t.best_distractor_correct;
        d["threshold"] = t.threshold;
        d["best_target_image"] = t.best_target_image;
        d["best_distractor_image"] = t.best_distractor_image;
        return d;
      },
      py::arg("matrix"), py::arg("threshold") = ranking::kDefaultTriggerThreshold);
  m.def("select_bundle", [](const std::string& matrix, std::size_t budget) {
    return ranking::select_bundle(matrix_arg(matrix), budget);
  });
  m.def(
      "ablate_quiz_size",
      [](const std::string& matrix, const std::vector<std::size_t>& sizes, std::size_t repetitions,
         std::uint64_t seed, bool exhaustive) {
        const ScoreMatrix mx = matrix_arg(matrix);
        const auto curve = exhaustive ? ranking::ablate_quiz_size_exhaustive(mx, sizes)
                                      : ranking::ablate_quiz_size(mx, sizes, repetitions, seed);
        py::dict d;
        d["sizes"] = curve.sizes;
        d["mean_spearman"] = curve.mean_spearman;
        d["repetitions"] = curve.repetitions;
        d["seed"] = curve.seed;
        return d;
      },
      py::arg("matrix"), py::arg("sizes"), py::arg("repetitions") = 100, py::arg("seed") = 0,
      py::arg("exhaustive") = false);

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    return stats::pearson(x, y);
  });
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) {
    return stats::spearman(x, y);
  });
  m.def("kruskal_wallis", [](const std::vector<std::vector<double>>& groups) {
    return test_dict(stats::kruskal_wallis(groups));
  });
  m.def("anova_oneway", [](const std::vector<std::vector<double>>& groups) {
    return test_dict(stats::anova_oneway(groups));
  });

  m.def("parse_final_answer", [](const std::string& raw, const std::vector<std::string>& options) {
    const AnswerOutcome o = vlmquiz::parse_final_answer(raw, options);
    return py::make_tuple(outcome_name(o.kind),
                          o.kind == OutcomeKind::selected ? py::object(py::int_(o.option_index))
                                                          : py::object(py::none()));
  });
  m.def("canonicalize_option", &canonicalize_option);
  m.def("validate_document", [](const std::string& document, const std::vector<std::string>& blocklist) {
    std::vector<std::vector<std::string>> out;
    for (const auto& report : quizgen::validate_document(Json::parse(document), blocklist)) {
      auto& names = out.emplace_back();
      for (auto v : report.violations) names.emplace_back(to_string(v));
    }
    return out;
  });
  m.def("normalize_quiz", [](const std::string& quiz) { return serialize_quiz(parse_quiz(quiz)); });

  m.def(
      "rank",
      [](const std::string& config_json) {
        service::RunConfig config = service::config_from_json(Json::parse(config_json));
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = service::cmd_rank(config, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("config"));
}
