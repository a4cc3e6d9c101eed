#include "gtp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gtp/errors.hpp"
#include "gtp/feature_io.hpp"
#include "gtp/random.hpp"

namespace gtp {

std::size_t select_ground_truth(const AnnotationSet& annotations) {
  const Consistency c = annotation_consistency(annotations);
  std::size_t best = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (c.per_annotation[i] > c.per_annotation[best]) {
      best = i;
    }
  }
  return best;
}

AnnotationMatrix build_annotation_matrix(std::span<const std::size_t> clip_indices, std::size_t clip_count,
                                         std::size_t max_clips) {
  return AnnotationMatrix::build(clip_indices, clip_count, max_clips);
}

VideoSample make_sample(std::string id, ClipSequence clips, TokenizedSentence sentence, AnnotationSet annotations,
                        std::size_t max_clips) {
  if (clips.length() == 0) {
    throw DataError(id, "video has no clips");
  }
  if (sentence.length() == 0) {
    throw DataError(id, "sentence has no words");
  }
  if (!sentence.tokens.empty() && sentence.tokens.size() != sentence.length()) {
    throw DataError(id, std::to_string(sentence.tokens.size()) + " tokens for " + std::to_string(sentence.length()) +
                            " embedding rows");
  }
  if (!clips.features.all_finite() || !sentence.embeddings.all_finite()) {
    throw DataError(id, "non-finite feature values");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const ClipSet& a = annotations[i];
    if (a.empty()) {
      throw DataError(id, "annotation " + std::to_string(i) + " is empty");
    }
    try {
      AnnotationMatrix::build(a, clips.length(), max_clips);
    } catch (const InvalidInput& e) {
      throw DataError(id, "annotation " + std::to_string(i) + ": " + e.what());
    }
  }
  VideoSample s;
  s.id = std::move(id);
  s.ground_truth = select_ground_truth(annotations);
  s.truth = AnnotationMatrix::build(annotations[s.ground_truth], clips.length(), max_clips);
  s.clips = std::move(clips);
  s.sentence = std::move(sentence);
  s.annotations = std::move(annotations);
  return s;
}

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T field(const json& rec, const char* key, const std::string& id) {
  if (!rec.contains(key)) {
    throw DataError(id, std::string("missing field '") + key + "'");
  }
  try {
    return rec.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(id, std::string("field '") + key + "': " + e.what());
  }
}

VideoSample parse_record(const json& rec, const std::filesystem::path& base, std::size_t max_clips) {
  const std::string id = rec.contains("id") && rec["id"].is_string() ? rec["id"].get<std::string>() : std::string();
  if (id.empty()) {
    throw DataError("", "record without a string 'id'");
  }
  const auto clip_count = field<std::size_t>(rec, "T", id);
  const auto clip_dim = field<std::size_t>(rec, "d_v", id);

  ClipSequence clips;
  try {
    clips.features = read_feature_file(resolve(base, field<std::string>(rec, "features", id)));
  } catch (const DataError& e) {
    throw DataError(id, e.what());
  }
  if (clips.features.rows() != clip_count || clips.features.cols() != clip_dim) {
    throw DataError(id, "feature file header " + clips.features.shape_string() + " does not match T=" +
                            std::to_string(clip_count) + ", d_v=" + std::to_string(clip_dim));
  }

  TokenizedSentence sentence;
  sentence.tokens = field<std::vector<std::string>>(rec, "tokens", id);
  if (rec.contains("embeddings")) {
    try {
      sentence.embeddings = read_feature_file(resolve(base, field<std::string>(rec, "embeddings", id)));
    } catch (const DataError& e) {
      throw DataError(id, e.what());
    }
  } else if (rec.contains("embeddings_inline")) {
    auto rows = field<std::vector<std::vector<double>>>(rec, "embeddings_inline", id);
    const std::size_t width = rows.empty() ? 0 : rows.front().size();
    std::vector<double> values;
    for (const auto& r : rows) {
      if (r.size() != width) {
        throw DataError(id, "ragged inline embeddings");
      }
      values.insert(values.end(), r.begin(), r.end());
    }
    sentence.embeddings = Tensor(rows.size(), width, std::move(values));
  } else {
    throw DataError(id, "missing 'embeddings' or 'embeddings_inline'");
  }
  if (sentence.embeddings.rows() != sentence.tokens.size()) {
    throw DataError(id, std::to_string(sentence.tokens.size()) + " tokens but " +
                            std::to_string(sentence.embeddings.rows()) + " embedding rows");
  }

  auto lists = field<std::vector<std::vector<long long>>>(rec, "annotations", id);
  if (lists.size() != 4) {
    throw DataError(id, "expected 4 annotations, found " + std::to_string(lists.size()));
  }
  AnnotationSet annotations;
  for (std::size_t i = 0; i < 4; ++i) {
    for (long long v : lists[i]) {
      if (v < 0 || static_cast<unsigned long long>(v) >= clip_count) {
        throw DataError(id, "annotation " + std::to_string(i) + " index " + std::to_string(v) + " out of range [0, " +
                                std::to_string(clip_count) + ")");
      }
      annotations[i].push_back(static_cast<std::size_t>(v));
    }
  }
  return make_sample(id, std::move(clips), std::move(sentence), std::move(annotations), max_clips);
}

}  // namespace

std::vector<VideoSample> load_manifest(const std::filesystem::path& path, std::size_t max_clips) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("", "cannot open manifest " + path.string());
  }
  const auto base = path.parent_path();
  std::vector<VideoSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    samples.push_back(parse_record(rec, base, max_clips));
  }
  return samples;
}

std::filesystem::path write_manifest(const std::filesystem::path& dir, const std::vector<VideoSample>& samples,
                                     const std::string& name) {
  std::filesystem::create_directories(dir / "features");
  const auto manifest = dir / name;
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) {
    throw DataError("", "cannot write manifest " + manifest.string());
  }
  for (const auto& s : samples) {
    const std::string clip_file = "features/" + s.id + ".clips.gtpf";
    const std::string word_file = "features/" + s.id + ".words.gtpf";
    write_feature_file(dir / clip_file, s.clips.features);
    write_feature_file(dir / word_file, s.sentence.embeddings);
    json rec;
    rec["id"] = s.id;
    rec["features"] = clip_file;
    rec["T"] = s.clips.length();
    rec["d_v"] = s.clips.features.cols();
    rec["tokens"] = s.sentence.tokens;
    rec["embeddings"] = word_file;
    json ann = json::array();
    for (const auto& a : s.annotations) {
      ann.push_back(a);
    }
    rec["annotations"] = ann;
    out << rec.dump() << '\n';
  }
  return manifest;
}

void SynthConfig::validate() const {
  if (min_clips < 1 || min_clips > max_clips) {
    throw InvalidInput("synth: clip count range is empty");
  }
  if (min_words < 1 || min_words > max_words) {
    throw InvalidInput("synth: word count range is empty");
  }
  if (concepts < 2) {
    throw InvalidInput("synth: need at least two concepts");
  }
  if (!(noise >= 0.0 && noise <= 1.0)) {
    throw InvalidInput("synth: noise rate must be in [0, 1]");
  }
  if (clip_dim == 0 || word_dim == 0 || max_thumbnail == 0) {
    throw InvalidInput("synth: dimensions must be positive");
  }
}

namespace {

Tensor gaussian_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) {
    v = rng.normal();
  }
  return t;
}

double to_storage(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

std::vector<VideoSample> synth_generate(const SynthConfig& config) {
  config.validate();
  Rng vocab_rng(Rng::derive(config.seed, ~std::uint64_t{0}));
  const Tensor clip_protos = gaussian_rows(config.concepts, config.clip_dim, vocab_rng);
  const Tensor concept_words = gaussian_rows(config.concepts, config.word_dim, vocab_rng);
  const Tensor filler_words = gaussian_rows(std::max<std::size_t>(config.filler_words, 1), config.word_dim, vocab_rng);

  std::vector<VideoSample> samples;
  samples.reserve(config.samples);
  for (std::size_t s = 0; s < config.samples; ++s) {
    const std::size_t index = config.first_index + s;
    Rng rng(Rng::derive(config.seed, index));
    const auto T = static_cast<std::size_t>(
        rng.integer(static_cast<std::int64_t>(config.min_clips), static_cast<std::int64_t>(config.max_clips)));
    const std::size_t max_targets = std::min({config.max_thumbnail, T});
    const auto target_clip_count = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(max_targets)));
    const std::size_t concept_cap = std::min<std::size_t>({3, config.concepts - 1, target_clip_count});
    const auto target_concept_count = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(concept_cap)));

    std::vector<std::size_t> concept_order(config.concepts);
    for (std::size_t i = 0; i < concept_order.size(); ++i) {
      concept_order[i] = i;
    }
    rng.shuffle(concept_order);
    const std::vector<std::size_t> targets(concept_order.begin(), concept_order.begin() + static_cast<long>(target_concept_count));
    const std::vector<std::size_t> others(concept_order.begin() + static_cast<long>(target_concept_count), concept_order.end());

    std::vector<std::size_t> positions(T);
    for (std::size_t i = 0; i < T; ++i) {
      positions[i] = i;
    }
    rng.shuffle(positions);
    std::vector<std::size_t> clip_concept(T);
    std::vector<bool> is_target(T, false);
    for (std::size_t i = 0; i < T; ++i) {
      const std::size_t pos = positions[i];
      if (i < target_clip_count) {
        is_target[pos] = true;
        clip_concept[pos] = i < target_concept_count
                                ? targets[i]
                                : targets[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(targets.size()) - 1))];
      } else {
        clip_concept[pos] = others[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(others.size()) - 1))];
      }
    }

    ClipSequence clips;
    clips.features = Tensor(T, config.clip_dim);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t c = 0; c < config.clip_dim; ++c) {
        clips.features(t, c) = to_storage(clip_protos(clip_concept[t], c) + config.feature_noise * rng.normal());
      }
    }

    const std::size_t word_count = std::max<std::size_t>(
        target_concept_count,
        static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(config.min_words), static_cast<std::int64_t>(config.max_words))));
    std::vector<std::pair<bool, std::size_t>> words;  // (is concept, id)
    for (std::size_t c : targets) {
      words.emplace_back(true, c);
    }
    while (words.size() < word_count) {
      words.emplace_back(false, static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(filler_words.rows()) - 1)));
    }
    rng.shuffle(words);
    TokenizedSentence sentence;
    sentence.embeddings = Tensor(words.size(), config.word_dim);
    for (std::size_t n = 0; n < words.size(); ++n) {
      const auto& [is_concept, id] = words[n];
      sentence.tokens.push_back((is_concept ? "concept" : "filler") + std::to_string(id));
      const Tensor& table = is_concept ? concept_words : filler_words;
      for (std::size_t c = 0; c < config.word_dim; ++c) {
        sentence.embeddings(n, c) = to_storage(table(id, c));
      }
    }

    ClipSet planted;
    for (std::size_t t = 0; t < T && planted.size() < config.max_thumbnail; ++t) {
      if (is_target[t]) {
        planted.push_back(t);
      }
    }

    AnnotationSet annotations;
    for (auto& a : annotations) {
      a = planted;
      for (std::size_t& clip : a) {
        if (rng.bernoulli(config.noise) && T > planted.size()) {
          std::size_t replacement = clip;
          while (std::find(planted.begin(), planted.end(), replacement) != planted.end()) {
            replacement = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(T) - 1));
          }
          clip = replacement;
        }
      }
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    samples.push_back(make_sample("syn" + std::to_string(index), std::move(clips), std::move(sentence),
                                  std::move(annotations), config.max_thumbnail));
  }
  return samples;
}

}  // namespace gtp
