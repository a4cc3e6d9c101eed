#include "gtp/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>

#include <nlohmann/json.hpp>

#include "gtp/errors.hpp"

namespace gtp {
namespace {

ClipSet as_set(std::span<const std::size_t> v) {
  ClipSet s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

std::size_t intersection_size(const ClipSet& a, const ClipSet& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace

PairScores pair_metrics(std::span<const std::size_t> predicted, std::span<const std::size_t> annotated) {
  const ClipSet p = as_set(predicted);
  const ClipSet a = as_set(annotated);
  if (a.empty()) {
    throw InvalidInput("pair_metrics: annotation is empty");
  }
  PairScores s;
  if (p.empty()) {
    return s;
  }
  const auto inter = static_cast<double>(intersection_size(p, a));
  const auto uni = static_cast<double>(p.size() + a.size()) - inter;
  s.precision = inter / static_cast<double>(p.size());
  s.recall = inter / static_cast<double>(a.size());
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  s.iou = inter / uni;
  return s;
}

double set_iou(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  const ClipSet sa = as_set(a);
  const ClipSet sb = as_set(b);
  const auto inter = static_cast<double>(intersection_size(sa, sb));
  const auto uni = static_cast<double>(sa.size() + sb.size()) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

MetricReport corpus_metrics(std::span<const ClipSet> predictions, std::span<const AnnotationSet> annotations, MaxMode mode) {
  if (predictions.size() != annotations.size()) {
    throw InvalidInput("corpus_metrics: " + std::to_string(predictions.size()) + " predictions for " +
                       std::to_string(annotations.size()) + " samples");
  }
  MetricReport r;
  r.samples = predictions.size();
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    std::array<PairScores, 4> scores;
    for (std::size_t i = 0; i < 4; ++i) {
      scores[i] = pair_metrics(predictions[k], annotations[k][i]);
    }
    PairScores best;
    if (mode == MaxMode::per_metric) {
      for (const auto& s : scores) {
        best.precision = std::max(best.precision, s.precision);
        best.recall = std::max(best.recall, s.recall);
        best.f1 = std::max(best.f1, s.f1);
        best.iou = std::max(best.iou, s.iou);
      }
    } else {
      std::size_t chosen = 0;
      for (std::size_t i = 1; i < 4; ++i) {
        if (scores[i].f1 > scores[chosen].f1) {
          chosen = i;
        }
      }
      best = scores[chosen];
    }
    r.per_sample.push_back(best);
    r.precision += best.precision;
    r.recall += best.recall;
    r.f1 += best.f1;
    r.iou += best.iou;
  }
  if (r.samples > 0) {
    const double m = static_cast<double>(r.samples);
    r.precision /= m;
    r.recall /= m;
    r.f1 /= m;
    r.iou /= m;
  }
  return r;
}

std::string MetricReport::to_key_value() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "samples=%zu\nprecision=%.6f\nrecall=%.6f\nf1=%.6f\niou=%.6f\n", samples, precision,
                recall, f1, iou);
  return buf;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["samples"] = samples;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["iou"] = iou;
  return j.dump();
}

Consistency annotation_consistency(const AnnotationSet& annotations) {
  for (const auto& a : annotations) {
    if (a.empty()) {
      throw InvalidInput("annotation_consistency: every annotation must be non-empty");
    }
  }
  Consistency c;
  for (std::size_t i = 0; i < 4; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (j != i) {
        total += set_iou(annotations[i], annotations[j]);
      }
    }
    c.per_annotation[i] = total / 3.0;
  }
  c.mean = (c.per_annotation[0] + c.per_annotation[1] + c.per_annotation[2] + c.per_annotation[3]) / 4.0;
  return c;
}

}  // namespace gtp
