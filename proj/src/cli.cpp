#include "gtp/cli.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "gtp/checkpoint.hpp"
#include "gtp/errors.hpp"

namespace gtp::cli {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("", "cannot write " + path.string());
  }
  out << body;
}

ModelConfig fit_to_data(ModelConfig config, const std::vector<VideoSample>& samples) {
  if (samples.empty()) {
    throw DataError("", "manifest has no samples");
  }
  config.dims.clip_dim = samples.front().clips.features.cols();
  config.dims.word_dim = samples.front().sentence.embeddings.cols();
  CheckpointHeader header;
  header.config = config;
  check_compatible(header, samples);
  return config;
}

std::vector<VideoSample> load_for(const CheckpointHeader& header, const std::filesystem::path& manifest) {
  std::vector<VideoSample> samples = load_manifest(manifest, header.config.dims.max_clips);
  check_compatible(header, samples);
  return samples;
}

}  // namespace

std::string log_header() { return "epoch\tloss\tgrad_norm\tlr\tprecision\trecall\tf1\tiou\n"; }

std::string log_row(const EpochRow& row) {
  const MetricReport& v = row.validation;
  return std::to_string(row.stats.epoch + 1) + '\t' + fmt(row.stats.mean_loss) + '\t' + fmt(row.stats.mean_grad_norm) +
         '\t' + fmt(row.stats.learning_rate) + '\t' + fmt(v.precision) + '\t' + fmt(v.recall) + '\t' + fmt(v.f1) +
         '\t' + fmt(v.iou) + '\n';
}

std::vector<EpochRow> run_train(const TrainOptions& options, std::ostream* progress) {
  options.train.validate();
  const std::vector<VideoSample> train = load_manifest(options.manifest, options.model.dims.max_clips);
  const ModelConfig config = fit_to_data(options.model, train);
  config.validate();
  std::vector<VideoSample> held_out;
  if (options.validation) {
    held_out = load_manifest(*options.validation, config.dims.max_clips);
    CheckpointHeader header;
    header.config = config;
    check_compatible(header, held_out);
  }
  const std::span<const VideoSample> scored = options.validation ? std::span<const VideoSample>(held_out)
                                                                 : std::span<const VideoSample>(train);

  Model model = Model::build(config, options.train.seed);
  Trainer trainer(model, options.train);
  std::vector<EpochRow> rows;
  std::string log = log_header();
  if (progress) {
    *progress << log;
  }
  for (std::size_t e = 0; e < options.train.epochs; ++e) {
    EpochRow row;
    row.stats = trainer.train_epoch(train);
    row.validation = evaluate(model, scored);
    row.validation.per_sample.clear();
    const std::string line = log_row(row);
    log += line;
    if (progress) {
      *progress << line << std::flush;
    }
    if (options.snapshot_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch-%03zu.gtpc", row.stats.epoch + 1);
      save_checkpoint(*options.snapshot_dir / name, model);
    }
    rows.push_back(std::move(row));
  }
  model.round_to_storage_precision();
  save_checkpoint(options.checkpoint, model);
  if (options.log) {
    write_file(*options.log, log);
  }
  return rows;
}

MetricReport run_eval(const EvalOptions& options) {
  std::vector<ClipSet> predictions;
  std::vector<VideoSample> samples;
  if (options.oracle) {
    samples = load_manifest(options.manifest, options.max_clips);
    for (const VideoSample& s : samples) {
      predictions.push_back(s.annotations[s.ground_truth]);
    }
  } else {
    if (!options.checkpoint) {
      throw InvalidInput("eval needs a checkpoint unless oracle mode is on");
    }
    const CheckpointHeader header = read_checkpoint_header(*options.checkpoint);
    samples = load_for(header, options.manifest);
    predictions = predict_all(load_checkpoint(*options.checkpoint), samples);
  }
  const MetricReport report = corpus_metrics(predictions, annotations_of(samples), options.mode);
  if (options.report_prefix) {
    write_file(options.report_prefix->string() + ".txt", report.to_key_value());
    write_file(options.report_prefix->string() + ".json", report.to_json());
  }
  return report;
}

std::vector<ClipSet> run_infer(const InferOptions& options, std::ostream& out) {
  const CheckpointHeader header = read_checkpoint_header(options.checkpoint);
  const std::vector<VideoSample> samples = load_for(header, options.manifest);
  const Model model = load_checkpoint(options.checkpoint);
  PredictOptions predict;
  predict.min_one_clip = options.min_one_clip;
  std::vector<ClipSet> selections;
  for (const VideoSample& s : samples) {
    const Prediction p = model.predict(s.clips, s.sentence, predict);
    nlohmann::json record;
    record["id"] = s.id;
    record["clips"] = p.selection.clips;
    if (model.config().variant == Variant::no_pointer) {
      record["scores"] = p.clip_scores;
    } else {
      record["steps"] = p.selection.steps;
      record["terminated"] = p.selection.terminated;
    }
    out << record.dump() << '\n';
    selections.push_back(p.selection.clips);
  }
  return selections;
}

GradCheckReport run_gradcheck(const GradCheckSetup& setup) {
  SynthConfig data;
  data.samples = 1;
  data.min_clips = data.max_clips = setup.clips;
  data.min_words = data.max_words = setup.words;
  data.clip_dim = data.word_dim = setup.width;
  data.seed = setup.seed;
  const VideoSample sample = synth_generate(data).front();

  ModelConfig config;
  config.dims = {setup.width, setup.width, setup.width, setup.width, setup.width, setup.graph_layers, 5};
  config.variant = setup.variant;
  config.lambda = setup.lambda;
  Model model = Model::build(config, setup.seed);
  return grad_check(
      model.named_tensors(),
      [&](Tape& tape) { return model.loss(tape, sample.clips, sample.sentence, sample.truth); }, setup.options);
}

std::vector<std::filesystem::path> run_synth(const SynthOptions& options) {
  options.config.validate();
  std::vector<std::filesystem::path> written;
  written.push_back(write_manifest(options.output_dir, synth_generate(options.config), "train.jsonl"));
  if (options.test_samples > 0) {
    SynthConfig test = options.config;
    test.samples = options.test_samples;
    test.first_index = options.config.first_index + options.config.samples;
    written.push_back(write_manifest(options.output_dir, synth_generate(test), "test.jsonl"));
  }
  return written;
}

}  // namespace gtp::cli
