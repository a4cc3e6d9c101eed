#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gtp/annotation.hpp"
#include "gtp/encoders.hpp"
#include "gtp/metrics.hpp"

namespace gtp {

/// One video-sentence pair with its four annotator thumbnails.
struct VideoSample {
  std::string id;
  ClipSequence clips;
  TokenizedSentence sentence;
  AnnotationSet annotations;
  /// Annotator whose thumbnail is the training target.
  std::size_t ground_truth = 0;
  AnnotationMatrix truth;

  std::size_t clip_count() const noexcept { return clips.length(); }
};

/// Index of the annotation with the highest consistency against the other
/// three; ties go to the lowest index.
std::size_t select_ground_truth(const AnnotationSet& annotations);

AnnotationMatrix build_annotation_matrix(std::span<const std::size_t> clip_indices, std::size_t clip_count,
                                         std::size_t max_clips);

/// Validates a sample and fills in ground_truth and truth.
/// Throws DataError tagged with the sample id.
VideoSample make_sample(std::string id, ClipSequence clips, TokenizedSentence sentence, AnnotationSet annotations,
                        std::size_t max_clips = 5);

/// Reads a JSON-lines manifest. Relative file paths resolve against the
/// manifest's directory. See docs in README for the record layout.
std::vector<VideoSample> load_manifest(const std::filesystem::path& path, std::size_t max_clips = 5);

/// Writes `samples` as `<dir>/<name>` plus one clip and one word feature file
/// per sample under `<dir>/features/`. Returns the manifest path.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const std::vector<VideoSample>& samples,
                                     const std::string& name = "manifest.jsonl");

struct SynthConfig {
  std::size_t samples = 100;
  std::size_t min_clips = 8;
  std::size_t max_clips = 16;
  std::size_t min_words = 4;
  std::size_t max_words = 8;
  std::size_t clip_dim = 16;
  std::size_t word_dim = 16;
  std::size_t concepts = 8;
  std::size_t filler_words = 12;
  double noise = 0.0;          // per-index annotator perturbation rate
  double feature_noise = 0.1;  // clip feature jitter around the concept prototype
  std::size_t max_thumbnail = 5;
  std::uint64_t seed = 0;
  /// Offset added to sample numbering, so disjoint corpora can share a seed.
  std::size_t first_index = 0;

  void validate() const;
};

/// Planted-concept corpus. Every clip shows one concept; the sentence names
/// one to three target concepts among filler words; the true thumbnail is
/// the clips showing a target concept (at most K, in order). Each of the four
/// annotations replaces each true clip by a random other clip with
/// probability `noise`.
std::vector<VideoSample> synth_generate(const SynthConfig& config);

}  // namespace gtp
