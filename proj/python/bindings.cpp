#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "conflate/batch_encoder.hpp"
#include "conflate/datagen.hpp"
#include "conflate/metrics.hpp"
#include "conflate/model_io.hpp"
#include "conflate/ranking.hpp"
#include "conflate/report.hpp"
#include "conflate/trainer.hpp"
#include "conflate/vocabulary.hpp"

namespace py = pybind11;
using namespace conflate;

namespace {

using PairTuple = std::tuple<std::string, std::string, std::size_t>;

Dataset to_dataset(const std::vector<PairTuple>& pairs) {
  Dataset d;
  for (const auto& [clean, corrupted, fold] : pairs) {
    if (fold >= kFoldCount) throw std::invalid_argument("fold must be in [0, 10)");
    d.pairs.push_back({d.pairs.size(), clean, corrupted, fold});
  }
  return d;
}

std::vector<PairTuple> from_dataset(const Dataset& d) {
  std::vector<PairTuple> out;
  for (const auto& p : d.pairs) out.emplace_back(p.clean, p.corrupted, p.fold);
  return out;
}

std::vector<EncodedString> encode_all(const std::vector<std::string>& strings) {
  std::vector<EncodedString> out;
  for (const auto& s : strings) out.push_back(Vocabulary::standard().encode(s));
  return out;
}

TrainConfig make_config(std::uint64_t seed, std::size_t max_epochs, std::size_t patience, std::size_t negatives,
                        double learning_rate, double gamma, std::size_t batch_size) {
  TrainConfig c;
  c.seed = seed;
  c.max_epochs = max_epochs;
  c.patience = patience;
  c.negatives = negatives;
  c.learning_rate = learning_rate;
  c.gamma = gamma;
  c.batch_size = batch_size;
  return c;
}

struct Model {
  ModelArtifact artifact;

  std::string kind() const { return std::string(to_string(artifact.params.kind())); }

  py::array_t<float> encode(const std::vector<std::string>& strings) const {
    const auto enc = encode_all(strings);
    const auto Y = encode_batch<float>(artifact.params, std::span<const EncodedString>(enc));
    py::array_t<float> out({static_cast<py::ssize_t>(Y.cols()), static_cast<py::ssize_t>(Y.rows())});
    auto view = out.mutable_unchecked<2>();
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
      for (Eigen::Index i = 0; i < Y.rows(); ++i) view(j, i) = Y(i, j);
    }
    return out;
  }

  std::vector<double> score(const std::string& query, const std::vector<std::string>& candidates) const {
    const auto q = Vocabulary::standard().encode(query);
    const auto c = encode_all(candidates);
    return cosine_scores(artifact.params, q, c);
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neural string conflation: character encoders trained with a ranking loss.";

  py::register_exception<TrainingDivergence>(m, "TrainingDivergence", PyExc_RuntimeError);
  py::register_exception<ModelFormatError>(m, "ModelFormatError", PyExc_ValueError);
  py::register_exception<EncodingError>(m, "EncodingError", PyExc_ValueError);

  m.attr("VOCABULARY") = std::string(Vocabulary::standard().symbols());
  m.attr("FOLD_COUNT") = kFoldCount;

  m.def("fold_case", [](const std::string& s) { return Vocabulary::standard().fold_case(s); });

  m.def(
      "generate_pairs",
      [](std::size_t n_pairs, std::uint64_t seed, double substitution_rate, double reversal_prob,
         double prefix_prob) {
        CorruptionConfig c;
        c.seed = seed;
        c.substitution_rate = substitution_rate;
        c.reversal_prob = reversal_prob;
        c.prefix_prob = prefix_prob;
        return from_dataset(build_dataset(n_pairs, c));
      },
      py::arg("n_pairs"), py::arg("seed") = 0, py::arg("substitution_rate") = 0.15,
      py::arg("reversal_prob") = 0.5, py::arg("prefix_prob") = 0.3,
      "Returns (clean, corrupted, fold) tuples.");

  m.def("recall_at_k", [](const std::vector<std::size_t>& ranks, std::size_t k) { return recall_at_k(ranks, k); },
        py::arg("ranks"), py::arg("k"));
  m.def(
      "rank_statistics",
      [](const std::vector<std::size_t>& ranks) {
        const auto s = rank_statistics(ranks);
        return py::dict(py::arg("median") = s.median, py::arg("mean") = s.mean,
                        py::arg("harmonic_mean") = s.harmonic_mean);
      },
      py::arg("ranks"));
  m.def("suggest_threshold", &suggest_threshold, py::arg("top1_mean"), py::arg("top2_mean"));
  m.def(
      "posterior",
      [](const std::vector<double>& scores, std::size_t positive, double gamma) {
        return posterior(scores, positive, gamma);
      },
      py::arg("scores"), py::arg("positive"), py::arg("gamma") = 10.0);

  py::class_<Model>(m, "Model")
      .def_static(
          "load", [](const std::string& path) { return Model{load_model(path)}; }, py::arg("path"))
      .def("save", [](const Model& self, const std::string& path) { save_model(self.artifact, path); },
           py::arg("path"))
      .def_property_readonly("kind", &Model::kind)
      .def_property_readonly("best_epoch", [](const Model& self) { return self.artifact.training.best_epoch; })
      .def("encode", &Model::encode, py::arg("strings"), "Returns one row per string.")
      .def("score", &Model::score, py::arg("query"), py::arg("candidates"),
           "Cosine similarity of the query against each candidate.");

  m.def(
      "train",
      [](const std::string& model, const std::vector<PairTuple>& pairs, std::size_t fold, std::uint64_t seed,
         std::size_t max_epochs, std::size_t patience, std::size_t negatives, double learning_rate, double gamma,
         std::size_t batch_size) {
        const Dataset d = to_dataset(pairs);
        const TrainConfig c = make_config(fold_seed(seed, fold), max_epochs, patience, negatives, learning_rate,
                                          gamma, batch_size);
        const FoldSplit split = split_for_fold(d, fold);
        const EncodedDataset enc = encode_dataset(d);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train_fold(parse_model_kind(model), enc, split.train, split.validation, c);
        }
        Model out;
        out.artifact.params = std::move(r.params);
        out.artifact.vocabulary = std::string(Vocabulary::standard().symbols());
        out.artifact.training = {seed, fold, r.epochs_run, r.best_epoch, r.best_validation_recall1};
        return out;
      },
      py::arg("model"), py::arg("pairs"), py::arg("fold") = 0, py::arg("seed") = 0, py::arg("max_epochs") = 30,
      py::arg("patience") = 5, py::arg("negatives") = 50, py::arg("learning_rate") = 2e-4,
      py::arg("gamma") = 10.0, py::arg("batch_size") = 100,
      "Trains on the folds other than `fold` and `fold + 1` (validation) and returns the best model.");

  m.def(
      "cross_validate",
      [](const std::string& model, const std::vector<PairTuple>& pairs, std::uint64_t seed, std::size_t folds,
         std::size_t jobs, std::size_t max_epochs, std::size_t patience, std::size_t negatives,
         double learning_rate, double gamma, std::size_t batch_size) {
        const Dataset d = to_dataset(pairs);
        const TrainConfig c =
            make_config(seed, max_epochs, patience, negatives, learning_rate, gamma, batch_size);
        CrossValidateOptions opt;
        opt.jobs = jobs;
        opt.fold_count = folds;
        RankingReport r;
        {
          py::gil_scoped_release release;
          r = cross_validate(parse_model_kind(model), d, c, opt);
        }
        return py::module_::import("json").attr("loads")(report_to_json(r, nlohmann::json::object()).dump());
      },
      py::arg("model"), py::arg("pairs"), py::arg("seed") = 0, py::arg("folds") = kFoldCount,
      py::arg("jobs") = 1, py::arg("max_epochs") = 30, py::arg("patience") = 5, py::arg("negatives") = 50,
      py::arg("learning_rate") = 2e-4, py::arg("gamma") = 10.0, py::arg("batch_size") = 100,
      "Runs k-fold evaluation and returns the report as a dict.");
}
