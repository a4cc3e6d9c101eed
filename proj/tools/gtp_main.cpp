#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "gtp/cli.hpp"
#include "gtp/errors.hpp"
#include "gtp/heatmap.hpp"

namespace {

using namespace gtp;

const std::map<std::string, Variant> kVariants = {
    {"full", Variant::full},
    {"no-graph", Variant::no_graph},
    {"no-pointer", Variant::no_pointer},
    {"no-mask", Variant::no_mask},
};

const std::map<std::string, bool> kOnOff = {{"on", true}, {"off", false}};

struct ModelFlags {
  std::size_t hidden = 256;
  std::size_t layers = 2;
  double lambda = 150.0;
  std::size_t max_clips = 5;
  Variant variant = Variant::full;
  bool tanh_fuse = false;
  bool tanh_graph = false;
  bool per_layer = false;
  bool raw_pointer = false;

  void add(CLI::App* app) {
    app->add_option("--hidden", hidden, "GRU, fusion and decoder width")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--gcn-layers", layers, "graph convolution layers")->capture_default_str();
    app->add_option("--lambda", lambda, "adjacency softmax scale")->capture_default_str();
    app->add_option("--max-clips", max_clips, "longest thumbnail K")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--variant", variant, "full, no-graph, no-pointer or no-mask")
        ->transform(CLI::CheckedTransformer(kVariants, CLI::ignore_case));
    app->add_flag("--tanh-fusion", tanh_fuse, "tanh instead of relu after fusion");
    app->add_flag("--tanh-graph", tanh_graph, "tanh instead of relu after each graph layer");
    app->add_flag("--per-layer-adjacency", per_layer, "recompute the adjacency from each layer's input");
    app->add_flag("--raw-pointer-features", raw_pointer, "skip the pointer's aggregating BiGRU");
  }

  ModelConfig config() const {
    ModelConfig c;
    c.dims.hidden = c.dims.fused = c.dims.pointer_hidden = hidden;
    c.dims.graph_layers = layers;
    c.dims.max_clips = max_clips;
    c.variant = variant;
    c.lambda = lambda;
    c.fuse_activation = tanh_fuse ? Activation::tanh : Activation::relu;
    c.graph_activation = tanh_graph ? Activation::tanh : Activation::relu;
    c.per_layer_adjacency = per_layer;
    c.raw_pointer_features = raw_pointer;
    return c;
  }
};

void print_report(const MetricReport& r) { std::cout << r.to_key_value(); }

int run(int argc, char** argv) {
  CLI::App app{"Pick the clips of a video that best match a sentence"};
  app.require_subcommand(1);

  // train
  cli::TrainOptions train;
  ModelFlags train_model;
  std::string validation, log, snapshots;
  bool teacher_forcing = true;
  auto* t = app.add_subcommand("train", "train a model and write a checkpoint");
  t->add_option("--manifest", train.manifest, "training manifest")->required()->check(CLI::ExistingFile);
  t->add_option("--validation", validation, "held-out manifest scored every epoch")->check(CLI::ExistingFile);
  t->add_option("--checkpoint", train.checkpoint, "output checkpoint")->required();
  t->add_option("--log", log, "per-epoch log (tab separated)");
  t->add_option("--snapshot-dir", snapshots, "write a checkpoint after every epoch");
  train_model.add(t);
  t->add_option("--lr", train.train.learning_rate, "learning rate")->capture_default_str();
  t->add_option("--decay-every", train.train.decay_every, "halve the rate every this many epochs (0 = never)")
      ->capture_default_str();
  t->add_option("--decay-factor", train.train.decay_factor)->capture_default_str();
  t->add_option("--epochs", train.train.epochs)->capture_default_str();
  t->add_option("--clip-norm", train.train.clip_norm, "per-sample gradient norm cap (0 = off)")->capture_default_str();
  t->add_option("--teacher-forcing", teacher_forcing, "on or off")->transform(CLI::CheckedTransformer(kOnOff));
  t->add_option("--seed", train.train.seed)->required();

  // eval
  cli::EvalOptions eval;
  std::string eval_checkpoint, report;
  bool single = false;
  auto* e = app.add_subcommand("eval", "score a checkpoint on a manifest");
  e->add_option("--checkpoint", eval_checkpoint)->check(CLI::ExistingFile);
  e->add_option("--manifest", eval.manifest)->required()->check(CLI::ExistingFile);
  e->add_option("--report", report, "write <prefix>.txt and <prefix>.json");
  e->add_flag("--oracle", eval.oracle, "score the ground-truth annotation instead of the model");
  e->add_option("--max-clips", eval.max_clips, "K for oracle mode")->capture_default_str();
  e->add_flag("--single-annotation", single, "take all metrics from the best-F1 annotation");

  // infer
  cli::InferOptions infer;
  std::string infer_out;
  auto* i = app.add_subcommand("infer", "print selected clips per sample as JSON lines");
  i->add_option("--checkpoint", infer.checkpoint)->required()->check(CLI::ExistingFile);
  i->add_option("--manifest", infer.manifest)->required()->check(CLI::ExistingFile);
  i->add_option("--output", infer_out, "file instead of stdout");
  i->add_flag("--min-one-clip", infer.min_one_clip, "never stop before the first clip");

  // gradcheck
  cli::GradCheckSetup gc;
  auto* g = app.add_subcommand("gradcheck", "compare gradients against finite differences");
  g->add_option("--clips", gc.clips)->capture_default_str();
  g->add_option("--words", gc.words)->capture_default_str();
  g->add_option("--width", gc.width)->capture_default_str();
  g->add_option("--gcn-layers", gc.graph_layers)->capture_default_str();
  g->add_option("--lambda", gc.lambda)->capture_default_str();
  g->add_option("--variant", gc.variant)->transform(CLI::CheckedTransformer(kVariants, CLI::ignore_case));
  g->add_option("--tol", gc.options.tol)->capture_default_str();
  g->add_option("--eps", gc.options.eps)->capture_default_str();
  g->add_option("--seed", gc.seed)->capture_default_str();

  // synth
  cli::SynthOptions synth;
  auto* s = app.add_subcommand("synth", "generate a planted-concept corpus");
  s->add_option("--output", synth.output_dir)->required();
  s->add_option("--samples", synth.config.samples)->capture_default_str();
  s->add_option("--test-samples", synth.test_samples)->capture_default_str();
  s->add_option("--noise", synth.config.noise)->capture_default_str();
  s->add_option("--min-clips", synth.config.min_clips)->capture_default_str();
  s->add_option("--max-clips", synth.config.max_clips)->capture_default_str();
  s->add_option("--clip-dim", synth.config.clip_dim)->capture_default_str();
  s->add_option("--word-dim", synth.config.word_dim)->capture_default_str();
  s->add_option("--concepts", synth.config.concepts)->capture_default_str();
  s->add_option("--seed", synth.config.seed)->required();

  // heatmap
  HeatmapOptions heat;
  double heat_lambda = 0.0;
  auto* h = app.add_subcommand("heatmap", "export attention and adjacency grids");
  h->add_option("--checkpoint", heat.checkpoints, "one checkpoint, or a series for adjacency snapshots")
      ->required()
      ->check(CLI::ExistingFile);
  h->add_option("--manifest", heat.manifest)->required()->check(CLI::ExistingFile);
  h->add_option("--output", heat.output_dir)->required();
  auto* lambda_opt = h->add_option("--lambda", heat_lambda, "override the adjacency scale");
  h->add_option("--max-samples", heat.max_samples, "0 = all")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? cli::exit_ok : cli::exit_usage;
  }

  if (*t) {
    train.model = train_model.config();
    train.train.teacher_forcing = teacher_forcing;
    if (!validation.empty()) train.validation = validation;
    if (!log.empty()) train.log = log;
    if (!snapshots.empty()) train.snapshot_dir = snapshots;
    cli::run_train(train, &std::cout);
  } else if (*e) {
    if (!eval_checkpoint.empty()) eval.checkpoint = eval_checkpoint;
    if (!report.empty()) eval.report_prefix = report;
    eval.mode = single ? MaxMode::single_annotation : MaxMode::per_metric;
    print_report(cli::run_eval(eval));
  } else if (*i) {
    if (infer_out.empty()) {
      cli::run_infer(infer, std::cout);
    } else {
      std::ofstream out(infer_out, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("", "cannot write " + infer_out);
      cli::run_infer(infer, out);
    }
  } else if (*g) {
    const GradCheckReport r = cli::run_gradcheck(gc);
    for (const TensorGradError& te : r.tensors) {
      std::printf("%-44s %5zu %.3e %s\n", te.name.c_str(), te.entries_checked, te.max_rel_error,
                  te.passed ? "ok" : "FAIL");
    }
    if (!r.failure.empty()) std::printf("failure: %s\n", r.failure.c_str());
    std::printf("gradcheck %s\n", r.passed ? "passed" : "failed");
    return r.passed ? cli::exit_ok : cli::exit_numeric;
  } else if (*s) {
    for (const auto& p : cli::run_synth(synth)) std::cout << p.string() << '\n';
  } else if (*h) {
    if (lambda_opt->count() > 0) heat.lambda = heat_lambda;
    const HeatmapSummary r = export_heatmaps(heat);
    std::printf("samples=%zu files=%zu max_row_error=%.3e\n", r.samples, r.files.size(), r.max_row_error);
  }
  return cli::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gtp::DataError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return gtp::cli::exit_data;
  } catch (const gtp::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << '\n';
    return gtp::cli::exit_numeric;
  } catch (const gtp::InvalidInput& err) {
    std::cerr << "invalid input: " << err.what() << '\n';
    return gtp::cli::exit_usage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return gtp::cli::exit_data;
  }
}
