#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gtp/tape.hpp"

namespace gtp {

/// A parameter tensor exposed by name for checking, optimizing, and
/// serialization.
struct NamedTensor {
  std::string name;
  Tensor* tensor = nullptr;
};

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  /// Entries checked per tensor; 0 checks every entry.
  std::size_t max_entries_per_tensor = 0;
  std::uint64_t seed = 0;
  /// Entries whose plain central difference disagrees by more than
  /// refine_threshold·tol are re-estimated with Ridders' extrapolation of
  /// central differences, starting from step `refine_step`, and judged on
  /// that estimate. This removes the roundoff floor (~1e-10 absolute) that
  /// otherwise dominates entries with very small gradients.
  bool refine = true;
  double refine_threshold = 0.01;
  double refine_step = 1e-2;
};

struct TensorGradError {
  std::string name;
  std::size_t entries_checked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  bool passed = true;
  std::size_t refined = 0;  // entries that needed extrapolation
};

struct GradCheckReport {
  std::vector<TensorGradError> tensors;
  bool passed = true;
  /// Set when the loss could not be evaluated (non-finite value); names the op.
  std::string failure;

  const TensorGradError* find(const std::string& name) const;
};

/// Builds the loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double relative_error(double analytic, double numeric);

/// Ridders' polynomial extrapolation of central differences of f at x.
/// Returns the derivative estimate; `error` receives its estimated error.
double ridders_derivative(const std::function<double(double)>& f, double x, double step, double* error = nullptr);

/// Compares tape gradients against central differences
/// (L(x + eps) - L(x - eps)) / 2eps for each parameter entry.
/// Parameters are restored to their original values on return.
GradCheckReport grad_check(const std::vector<NamedTensor>& params, const LossBuilder& loss, const GradCheckOptions& options = {});

}  // namespace gtp
