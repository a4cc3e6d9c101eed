#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gtp/checkpoint.hpp"
#include "gtp/errors.hpp"
#include "gtp/metrics.hpp"
#include "gtp/training.hpp"

namespace py = pybind11;
using namespace gtp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  if (a.ndim() != 2) throw InvalidInput("expected a 2-D array");
  const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
  return Tensor(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Array to_array(const Tensor& t) {
  Array out({t.rows(), t.cols()});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["iou"] = r.iou;
  d["samples"] = r.samples;
  return d;
}

AnnotationSet to_annotations(const std::vector<ClipSet>& sets) {
  if (sets.size() != 4) throw InvalidInput("expected four annotations");
  return {sets[0], sets[1], sets[2], sets[3]};
}

}  // namespace

PYBIND11_MODULE(gtp_py, m) {
  m.doc() = "Sentence-guided video clip selection";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::enum_<Variant>(m, "Variant")
      .value("full", Variant::full)
      .value("no_graph", Variant::no_graph)
      .value("no_pointer", Variant::no_pointer)
      .value("no_mask", Variant::no_mask);

  m.def(
      "pair_metrics",
      [](const ClipSet& p, const ClipSet& a) {
        const PairScores s = pair_metrics(p, a);
        return py::make_tuple(s.precision, s.recall, s.f1, s.iou);
      },
      py::arg("predicted"), py::arg("annotation"));
  m.def(
      "corpus_metrics",
      [](const std::vector<ClipSet>& preds, const std::vector<std::vector<ClipSet>>& anns, bool single) {
        std::vector<AnnotationSet> a;
        for (const auto& s : anns) a.push_back(to_annotations(s));
        return report_dict(corpus_metrics(preds, a, single ? MaxMode::single_annotation : MaxMode::per_metric));
      },
      py::arg("predictions"), py::arg("annotations"), py::arg("single_annotation") = false);
  m.def(
      "annotation_consistency",
      [](const std::vector<ClipSet>& sets) {
        const Consistency c = annotation_consistency(to_annotations(sets));
        return py::make_tuple(std::vector<double>(c.per_annotation.begin(), c.per_annotation.end()), c.mean);
      },
      py::arg("annotations"));
  m.def(
      "select_ground_truth", [](const std::vector<ClipSet>& sets) { return select_ground_truth(to_annotations(sets)); },
      py::arg("annotations"));

  py::class_<VideoSample>(m, "Sample")
      .def_readonly("id", &VideoSample::id)
      .def_property_readonly("clips", [](const VideoSample& s) { return to_array(s.clips.features); })
      .def_property_readonly("words", [](const VideoSample& s) { return to_array(s.sentence.embeddings); })
      .def_property_readonly("tokens", [](const VideoSample& s) { return s.sentence.tokens; })
      .def_property_readonly("annotations",
                             [](const VideoSample& s) {
                               return std::vector<ClipSet>(s.annotations.begin(), s.annotations.end());
                             })
      .def_readonly("ground_truth", &VideoSample::ground_truth)
      .def_property_readonly("truth", [](const VideoSample& s) { return s.truth.indices(); });

  m.def(
      "synth",
      [](std::size_t samples, std::uint64_t seed, double noise, std::size_t clip_dim, std::size_t word_dim,
         std::size_t first_index) {
        SynthConfig c;
        c.samples = samples;
        c.seed = seed;
        c.noise = noise;
        c.clip_dim = clip_dim;
        c.word_dim = word_dim;
        c.first_index = first_index;
        return synth_generate(c);
      },
      py::arg("samples"), py::arg("seed"), py::arg("noise") = 0.0, py::arg("clip_dim") = 16, py::arg("word_dim") = 16,
      py::arg("first_index") = 0);
  m.def(
      "load_manifest", [](const std::filesystem::path& p, std::size_t k) { return load_manifest(p, k); },
      py::arg("path"), py::arg("max_clips") = 5);

  py::class_<Model>(m, "Model")
      .def(py::init([](std::size_t clip_dim, std::size_t word_dim, std::size_t hidden, std::size_t graph_layers,
                       std::size_t max_clips, double lambda, Variant variant, std::uint64_t seed) {
             ModelConfig c;
             c.dims = {clip_dim, word_dim, hidden, hidden, hidden, graph_layers, max_clips};
             c.lambda = lambda;
             c.variant = variant;
             return Model::build(c, seed);
           }),
           py::arg("clip_dim"), py::arg("word_dim"), py::arg("hidden") = 16, py::arg("graph_layers") = 2,
           py::arg("max_clips") = 5, py::arg("lambda_") = 150.0, py::arg("variant") = Variant::full,
           py::arg("seed") = 0)
      .def_property_readonly("variant", [](const Model& md) { return md.config().variant; })
      .def_property_readonly("parameter_count", [](Model& md) { return md.parameter_count(); })
      .def(
          "predict",
          [](const Model& md, const Array& clips, const Array& words, bool min_one_clip) {
            PredictOptions o;
            o.min_one_clip = min_one_clip;
            const Prediction p = md.predict(ClipSequence{to_tensor(clips)}, TokenizedSentence{{}, to_tensor(words)}, o);
            py::dict d;
            d["clips"] = p.selection.clips;
            d["steps"] = p.selection.steps;
            d["terminated"] = p.selection.terminated;
            d["attention"] = to_array(p.attention);
            d["adjacency"] = to_array(p.adjacency);
            d["clip_scores"] = p.clip_scores;
            return d;
          },
          py::arg("clips"), py::arg("words"), py::arg("min_one_clip") = false)
      .def(
          "train",
          [](Model& md, const std::vector<VideoSample>& data, std::size_t epochs, double lr, std::uint64_t seed) {
            TrainConfig c;
            c.learning_rate = lr;
            c.seed = seed;
            Trainer tr(md, c);
            std::vector<double> losses;
            for (std::size_t e = 0; e < epochs; ++e) losses.push_back(tr.train_epoch(data).mean_loss);
            return losses;
          },
          py::arg("samples"), py::arg("epochs"), py::arg("learning_rate") = 1e-3, py::arg("seed") = 0)
      .def(
          "evaluate",
          [](const Model& md, const std::vector<VideoSample>& data) { return report_dict(evaluate(md, data)); },
          py::arg("samples"))
      .def("save", [](Model& md, const std::filesystem::path& p) {
        md.round_to_storage_precision();
        save_checkpoint(p, md);
      }, py::arg("path"))
      .def_static("load", [](const std::filesystem::path& p) { return load_checkpoint(p); }, py::arg("path"));
}
