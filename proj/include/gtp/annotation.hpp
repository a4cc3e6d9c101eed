#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gtp/tensor.hpp"

namespace gtp {

/// T×K binary matrix with B[t][k] = 1 iff clip t is the k-th thumbnail clip,
/// stored as its ordered clip indices.
class AnnotationMatrix {
 public:
  AnnotationMatrix() = default;

  /// Validates that indices strictly increase, are < T, and number at most K.
  static AnnotationMatrix build(std::span<const std::size_t> clip_indices, std::size_t clip_count, std::size_t max_clips);

  /// Reads a dense 0/1 matrix. Each column holds at most one mark, used
  /// columns form a prefix, and marked rows strictly increase with k.
  static AnnotationMatrix from_dense(const Tensor& b);

  std::size_t clip_count() const noexcept { return clip_count_; }
  std::size_t max_clips() const noexcept { return max_clips_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  bool marked(std::size_t t, std::size_t k) const noexcept { return k < indices_.size() && indices_[k] == t; }

  Tensor dense() const;

  bool operator==(const AnnotationMatrix&) const = default;

 private:
  std::size_t clip_count_ = 0;
  std::size_t max_clips_ = 0;
  std::vector<std::size_t> indices_;
};

/// Ascending marked clips followed by the end slot index T.
std::vector<std::size_t> pointer_targets(const AnnotationMatrix& b);
std::vector<std::size_t> pointer_targets(const Tensor& dense_b);

}  // namespace gtp
