#include "gtp/annotation.hpp"

#include <string>

#include "gtp/errors.hpp"

namespace gtp {

AnnotationMatrix AnnotationMatrix::build(std::span<const std::size_t> clip_indices, std::size_t clip_count,
                                         std::size_t max_clips) {
  if (clip_indices.size() > max_clips) {
    throw InvalidInput("annotation has " + std::to_string(clip_indices.size()) + " clips, more than K = " +
                       std::to_string(max_clips));
  }
  for (std::size_t k = 0; k < clip_indices.size(); ++k) {
    if (clip_indices[k] >= clip_count) {
      throw InvalidInput("annotation clip index " + std::to_string(clip_indices[k]) + " out of range for T = " +
                         std::to_string(clip_count));
    }
    if (k > 0 && clip_indices[k] <= clip_indices[k - 1]) {
      throw InvalidInput("annotation clip indices must strictly increase");
    }
  }
  AnnotationMatrix b;
  b.clip_count_ = clip_count;
  b.max_clips_ = max_clips;
  b.indices_.assign(clip_indices.begin(), clip_indices.end());
  return b;
}

AnnotationMatrix AnnotationMatrix::from_dense(const Tensor& b) {
  std::vector<std::size_t> indices;
  bool gap = false;
  for (std::size_t k = 0; k < b.cols(); ++k) {
    std::size_t marks = 0;
    std::size_t row = 0;
    for (std::size_t t = 0; t < b.rows(); ++t) {
      const double v = b(t, k);
      if (v != 0.0 && v != 1.0) {
        throw InvalidInput("annotation matrix entries must be 0 or 1");
      }
      if (v == 1.0) {
        ++marks;
        row = t;
      }
    }
    if (marks > 1) {
      throw InvalidInput("annotation matrix column " + std::to_string(k) + " has " + std::to_string(marks) + " marks");
    }
    if (marks == 0) {
      gap = true;
      continue;
    }
    if (gap) {
      throw InvalidInput("annotation matrix column " + std::to_string(k) + " is used after an empty column");
    }
    if (!indices.empty() && row <= indices.back()) {
      throw InvalidInput("annotation matrix marks must move to strictly later clips");
    }
    indices.push_back(row);
  }
  return build(indices, b.rows(), b.cols());
}

Tensor AnnotationMatrix::dense() const {
  Tensor b(clip_count_, max_clips_);
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    b(indices_[k], k) = 1.0;
  }
  return b;
}

std::vector<std::size_t> pointer_targets(const AnnotationMatrix& b) {
  std::vector<std::size_t> targets = b.indices();
  targets.push_back(b.clip_count());
  return targets;
}

std::vector<std::size_t> pointer_targets(const Tensor& dense_b) { return pointer_targets(AnnotationMatrix::from_dense(dense_b)); }

}  // namespace gtp
