#include "gtp/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gtp/errors.hpp"

namespace gtp {

const TensorGradError* GradCheckReport::find(const std::string& name) const {
  auto it = std::find_if(tensors.begin(), tensors.end(), [&](const TensorGradError& e) { return e.name == name; });
  return it == tensors.end() ? nullptr : &*it;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const LossBuilder& loss) {
  Tape tape;
  return loss(tape).scalar();
}

}  // namespace

double ridders_derivative(const std::function<double(double)>& f, double x, double step, double* error) {
  constexpr int kTable = 10;
  constexpr double kShrink = 1.4;
  constexpr double kShrink2 = kShrink * kShrink;
  constexpr double kSafe = 2.0;
  double a[kTable][kTable];
  double h = step;
  a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
  double best = a[0][0];
  double err = std::numeric_limits<double>::max();
  for (int i = 1; i < kTable; ++i) {
    h /= kShrink;
    a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
    double fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        best = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= kSafe * err) {
      break;
    }
  }
  if (error != nullptr) {
    *error = err;
  }
  return best;
}

GradCheckReport grad_check(const std::vector<NamedTensor>& params, const LossBuilder& loss, const GradCheckOptions& options) {
  GradCheckReport report;
  std::vector<Tensor> analytic;
  try {
    Tape tape;
    Var l = loss(tape);
    tape.backward(l);
    for (const auto& p : params) {
      analytic.push_back(tape.param_grad(*p.tensor));
    }
  } catch (const NumericError& e) {
    report.passed = false;
    report.failure = e.what();
    return report;
  }

  std::mt19937_64 rng(options.seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& t = *params[pi].tensor;
    std::vector<std::size_t> entries(t.size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (options.max_entries_per_tensor != 0 && entries.size() > options.max_entries_per_tensor) {
      for (std::size_t i = 0; i < options.max_entries_per_tensor; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (entries.size() - i));
        std::swap(entries[i], entries[j]);
      }
      entries.resize(options.max_entries_per_tensor);
    }
    TensorGradError err;
    err.name = params[pi].name;
    for (std::size_t idx : entries) {
      const double original = t[idx];
      double plus = 0.0;
      double minus = 0.0;
      try {
        t[idx] = original + options.eps;
        plus = evaluate(loss);
        t[idx] = original - options.eps;
        minus = evaluate(loss);
      } catch (const NumericError& e) {
        t[idx] = original;
        report.passed = false;
        report.failure = err.name + "[" + std::to_string(idx) + "]: " + e.what();
        return report;
      }
      t[idx] = original;
      double numeric = (plus - minus) / (2.0 * options.eps);
      double rel = relative_error(analytic[pi][idx], numeric);
      if (rel > options.refine_threshold * options.tol && options.refine) {
        try {
          const double refined = ridders_derivative(
              [&](double x) {
                t[idx] = x;
                return evaluate(loss);
              },
              original, options.refine_step);
          t[idx] = original;
          ++err.refined;
          numeric = refined;
          rel = relative_error(analytic[pi][idx], refined);
        } catch (const NumericError&) {
          t[idx] = original;
        }
      }
      ++err.entries_checked;
      if (rel > err.max_rel_error || err.entries_checked == 1) {
        err.max_rel_error = std::max(err.max_rel_error, rel);
        if (rel >= err.max_rel_error) {
          err.worst_index = idx;
          err.analytic_at_worst = analytic[pi][idx];
          err.numeric_at_worst = numeric;
        }
      }
    }
    err.passed = err.max_rel_error <= options.tol;
    report.passed = report.passed && err.passed;
    report.tensors.push_back(std::move(err));
  }
  return report;
}

}  // namespace gtp
