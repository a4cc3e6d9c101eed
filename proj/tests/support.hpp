#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gtp/params.hpp"
#include "gtp/random.hpp"
#include "gtp/tensor.hpp"

namespace gtp::testing {

inline Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Tensor t(rows, cols);
  for (double& v : t.values()) {
    v = scale * rng.normal();
  }
  return t;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Scalar-loop gated recurrent step, written independently of the tape ops.
inline std::vector<double> gru_step_ref(const std::vector<double>& x, const std::vector<double>& h,
                                        const GruDirection& p) {
  const std::size_t in = x.size();
  const std::size_t hid = h.size();
  std::vector<double> z(hid), r(hid), out(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    double az = p.b_z(0, j), ar = p.b_r(0, j);
    for (std::size_t i = 0; i < in; ++i) {
      az += x[i] * p.w_z(i, j);
      ar += x[i] * p.w_r(i, j);
    }
    for (std::size_t i = 0; i < hid; ++i) {
      az += h[i] * p.u_z(i, j);
      ar += h[i] * p.u_r(i, j);
    }
    z[j] = sigmoid(az);
    r[j] = sigmoid(ar);
  }
  for (std::size_t j = 0; j < hid; ++j) {
    double an = p.b_n(0, j);
    for (std::size_t i = 0; i < in; ++i) {
      an += x[i] * p.w_n(i, j);
    }
    for (std::size_t i = 0; i < hid; ++i) {
      an += r[i] * h[i] * p.u_n(i, j);
    }
    const double n = std::tanh(an);
    out[j] = (1.0 - z[j]) * h[j] + z[j] * n;
  }
  return out;
}

/// Bidirectional encoding by scalar loops: L × 2H.
inline Tensor bigru_ref(const Tensor& inputs, const BiGruParams& p) {
  const std::size_t len = inputs.rows();
  const std::size_t hid = p.hidden();
  Tensor out(len, 2 * hid);
  auto row = [&](std::size_t t) { return std::vector<double>(inputs.row(t).begin(), inputs.row(t).end()); };
  std::vector<double> h(hid, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    h = gru_step_ref(row(t), h, p.forward);
    std::copy(h.begin(), h.end(), out.row(t).begin());
  }
  h.assign(hid, 0.0);
  for (std::size_t t = len; t-- > 0;) {
    h = gru_step_ref(row(t), h, p.backward);
    std::copy(h.begin(), h.end(), out.row(t).begin() + static_cast<std::ptrdiff_t>(hid));
  }
  return out;
}

inline std::vector<std::size_t> random_subset(std::size_t universe, std::size_t max_size, Rng& rng,
                                              std::size_t min_size = 0) {
  const auto size = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(min_size),
                                                         static_cast<std::int64_t>(std::min(max_size, universe))));
  std::vector<std::size_t> all(universe);
  for (std::size_t i = 0; i < universe; ++i) all[i] = i;
  rng.shuffle(all);
  all.resize(size);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace gtp::testing
