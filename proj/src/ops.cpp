#include "gtp/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gtp/errors.hpp"

namespace gtp::ops {
namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) {
    throw InvalidInput("operation on an unbound Var");
  }
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  if (a.tape() != b.tape()) {
    throw InvalidInput("operands recorded on different tapes");
  }
  return tape_of(a);
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw InvalidInput(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

// dst += src (same shape).
void accumulate(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] += src[i];
  }
}

// dst += a * b^T.
void accumulate_a_bt(Tensor& dst, const Tensor& a, const Tensor& b) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        s += ar[k] * br[k];
      }
      dst(i, j) += s;
    }
  }
}

// dst += a^T * b.
void accumulate_at_b(Tensor& dst, const Tensor& a, const Tensor& b) {
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ar = a.row(k).data();
    const double* br = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ar[i];
      if (aki == 0.0) {
        continue;
      }
      double* dr = dst.row(i).data();
      for (std::size_t j = 0; j < b.cols(); ++j) {
        dr[j] += aki * br[j];
      }
    }
  }
}

template <typename F, typename DF>
Var unary(const char* op, Var a, F f, DF df_from_output) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = f(x[i]);
  }
  const std::size_t ia = a.id();
  return t.record(op, std::move(y), {ia}, [ia, df_from_output](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(ia)) {
      return;
    }
    const Tensor& out = tp.value(self);
    const Tensor& in = tp.value(ia);
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * df_from_output(in[i], out[i]);
    }
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  Tensor out = matmul_values(a.value(), b.value());
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record("matmul", std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      accumulate_a_bt(tp.grad_mut(ia), g, tp.value(ib));
    }
    if (tp.requires_grad(ib)) {
      accumulate_at_b(tp.grad_mut(ib), tp.value(ia), g);
    }
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  return t.record("transpose", a.value().transposed(), {ia}, [ia](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_mut(ia);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) {
        ga(c, r) += g(r, c);
      }
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  accumulate(out, b.value());
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record("add", std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      accumulate(tp.grad_mut(ia), g);
    }
    if (tp.requires_grad(ib)) {
      accumulate(tp.grad_mut(ib), g);
    }
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("sub", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] -= b.value()[i];
  }
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record("sub", std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      accumulate(tp.grad_mut(ia), g);
    }
    if (tp.requires_grad(ib)) {
      Tensor& gb = tp.grad_mut(ib);
      for (std::size_t i = 0; i < g.size(); ++i) {
        gb[i] -= g[i];
      }
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("mul", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] *= b.value()[i];
  }
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record("mul", std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor& ga = tp.grad_mut(ia);
      const Tensor& vb = tp.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * vb[i];
      }
    }
    if (tp.requires_grad(ib)) {
      Tensor& gb = tp.grad_mut(ib);
      const Tensor& va = tp.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) {
        gb[i] += g[i] * va[i];
      }
    }
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.values()) {
    v *= s;
  }
  const std::size_t ia = a.id();
  return t.record("scale", std::move(out), {ia}, [ia, s](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += s * g[i];
    }
  });
}

Var add_row(Var a, Var r) {
  Tape& t = tape_of(a, r);
  const Tensor& x = a.value();
  const Tensor& b = r.value();
  if (b.rows() != 1 || b.cols() != x.cols()) {
    throw InvalidInput("add_row: expected 1x" + std::to_string(x.cols()) + " row, got " + b.shape_string());
  }
  Tensor out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      out(i, j) += b[j];
    }
  }
  const std::size_t ia = a.id();
  const std::size_t ir = r.id();
  return t.record("add_row", std::move(out), {ia, ir}, [ia, ir](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      accumulate(tp.grad_mut(ia), g);
    }
    if (tp.requires_grad(ir)) {
      Tensor& gr = tp.grad_mut(ir);
      for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < g.cols(); ++j) {
          gr[j] += g(i, j);
        }
      }
    }
  });
}

Var sigmoid(Var a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        if (x >= 0) {
          return 1.0 / (1.0 + std::exp(-x));
        }
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var row(Var a, std::size_t r) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  if (r >= x.rows()) {
    throw InvalidInput("row: index " + std::to_string(r) + " out of range for " + x.shape_string());
  }
  Tensor out = Tensor::row_vector(x.row(r));
  const std::size_t ia = a.id();
  return t.record("row", std::move(out), {ia}, [ia, r](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    auto dst = tp.grad_mut(ia).row(r);
    for (std::size_t j = 0; j < g.cols(); ++j) {
      dst[j] += g[j];
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) {
    throw InvalidInput("concat_rows: no parts");
  }
  Tape& t = tape_of(parts.front());
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  std::vector<std::size_t> ids;
  ids.reserve(parts.size());
  for (const Var& p : parts) {
    if (p.tape() != &t || p.cols() != cols) {
      throw InvalidInput("concat_rows: incompatible part " + p.value().shape_string());
    }
    rows += p.rows();
    ids.push_back(p.id());
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().values().begin(), p.value().values().end(), out.values().begin() + offset);
    offset += p.value().size();
  }
  return t.record("concat_rows", std::move(out), ids, [ids](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    std::size_t off = 0;
    for (std::size_t id : ids) {
      const std::size_t n = tp.value(id).size();
      if (tp.requires_grad(id)) {
        Tensor& gi = tp.grad_mut(id);
        for (std::size_t i = 0; i < n; ++i) {
          gi[i] += g[off + i];
        }
      }
      off += n;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) {
    throw InvalidInput("concat_cols: no parts");
  }
  Tape& t = tape_of(parts.front());
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    if (p.tape() != &t || p.rows() != rows) {
      throw InvalidInput("concat_cols: incompatible part " + p.value().shape_string());
    }
    cols += p.cols();
    ids.push_back(p.id());
  }
  Tensor out(rows, cols);
  std::size_t c0 = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + c0);
    }
    c0 += v.cols();
  }
  return t.record("concat_cols", std::move(out), ids, [ids](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    std::size_t c = 0;
    for (std::size_t id : ids) {
      const std::size_t w = tp.value(id).cols();
      if (tp.requires_grad(id)) {
        Tensor& gi = tp.grad_mut(id);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t j = 0; j < w; ++j) {
            gi(r, j) += g(r, c + j);
          }
        }
      }
      c += w;
    }
  });
}

Var concat_cols(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat_cols(std::span<const Var>(parts));
}

Var mean_rows(Var a) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  if (x.rows() == 0) {
    throw InvalidInput("mean_rows: no rows");
  }
  Tensor out(1, x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      out[c] += x(r, c);
    }
  }
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (double& v : out.values()) {
    v *= inv;
  }
  const std::size_t ia = a.id();
  return t.record("mean_rows", std::move(out), {ia}, [ia, inv](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_mut(ia);
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      for (std::size_t c = 0; c < ga.cols(); ++c) {
        ga(r, c) += g[c] * inv;
      }
    }
  });
}

Var sum(std::span<const Var> scalars) {
  if (scalars.empty()) {
    throw InvalidInput("sum: no terms");
  }
  Tape& t = tape_of(scalars.front());
  double total = 0.0;
  std::vector<std::size_t> ids;
  for (const Var& s : scalars) {
    if (s.tape() != &t || s.value().size() != 1) {
      throw InvalidInput("sum: terms must be 1x1 on one tape");
    }
    total += s.scalar();
    ids.push_back(s.id());
  }
  return t.record("sum", Tensor(1, 1, total), ids, [ids](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    for (std::size_t id : ids) {
      if (tp.requires_grad(id)) {
        tp.grad_mut(id)[0] += g;
      }
    }
  });
}

namespace {

// y = softmax over active entries; dy -> dx for each row independently.
void softmax_backward_rows(const Tensor& y, const Tensor& g, Tensor& gx) {
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < y.cols(); ++c) {
      dot += y(r, c) * g(r, c);
    }
    for (std::size_t c = 0; c < y.cols(); ++c) {
      gx(r, c) += y(r, c) * (g(r, c) - dot);
    }
  }
}

}  // namespace

Tensor masked_softmax_values(const Tensor& scores, std::span<const std::uint8_t> mask) {
  if (scores.rows() != 1 || mask.size() != scores.cols()) {
    throw InvalidInput("masked_softmax: expected 1xL scores with L mask entries, got " + scores.shape_string() +
                       " and " + std::to_string(mask.size()));
  }
  double max_active = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) {
      any = true;
      max_active = std::max(max_active, scores[i]);
    }
  }
  if (!any) {
    throw InvalidInput("masked_softmax: mask has no active entry");
  }
  Tensor out(1, scores.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) {
      out[i] = std::exp(scores[i] - max_active);
      total += out[i];
    }
  }
  for (double& v : out.values()) {
    v /= total;
  }
  return out;
}

Var softmax_rows(Var scores) {
  Tape& t = tape_of(scores);
  const Tensor& s = scores.value();
  Tensor out(s.rows(), s.cols());
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const auto in = s.row(r);
    auto o = out.row(r);
    const double m = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - m);
      total += o[c];
    }
    for (double& v : o) {
      v /= total;
    }
  }
  const std::size_t is = scores.id();
  return t.record("softmax_rows", std::move(out), {is}, [is](Tape& tp, std::size_t self) {
    softmax_backward_rows(tp.value(self), tp.grad(self), tp.grad_mut(is));
  });
}

Var masked_softmax(Var scores, std::span<const std::uint8_t> mask) {
  Tape& t = tape_of(scores);
  Tensor out = masked_softmax_values(scores.value(), mask);
  const std::size_t is = scores.id();
  return t.record("masked_softmax", std::move(out), {is}, [is](Tape& tp, std::size_t self) {
    // Masked outputs are exactly zero, so they receive and pass no gradient.
    softmax_backward_rows(tp.value(self), tp.grad(self), tp.grad_mut(is));
  });
}

Tensor layer_norm_values(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t d = x.cols();
  if (d == 0 || gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 || bias.cols() != d) {
    throw InvalidInput("layer_norm: gain/bias must be 1x" + std::to_string(d) + " (input " + x.shape_string() + ")");
  }
  if (!(eps > 0.0)) {
    throw InvalidInput("layer_norm: eps must be positive");
  }
  Tensor out(x.rows(), d);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto in = x.row(r);
    double mean = 0.0;
    for (double v : in) {
      mean += v;
    }
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : in) {
      var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(d);
    const double inv_std = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      out(r, c) = (in[c] - mean) * inv_std * gain[c] + bias[c];
    }
  }
  return out;
}

Var layer_norm_rows(Var x, Var gain, Var bias, double eps) {
  Tape& t = tape_of(x, gain);
  tape_of(x, bias);
  Tensor out = layer_norm_values(x.value(), gain.value(), bias.value(), eps);
  const std::size_t ix = x.id();
  const std::size_t ig = gain.id();
  const std::size_t ib = bias.id();
  return t.record("layer_norm", std::move(out), {ix, ig, ib}, [ix, ig, ib, eps](Tape& tp, std::size_t self) {
    const Tensor& xv = tp.value(ix);
    const Tensor& gv = tp.value(ig);
    const Tensor& g = tp.grad(self);
    const std::size_t d = xv.cols();
    const double inv_d = 1.0 / static_cast<double>(d);
    std::vector<double> xhat(d);
    std::vector<double> dxhat(d);
    for (std::size_t r = 0; r < xv.rows(); ++r) {
      const auto in = xv.row(r);
      double mean = 0.0;
      for (double v : in) {
        mean += v;
      }
      mean *= inv_d;
      double var = 0.0;
      for (double v : in) {
        var += (v - mean) * (v - mean);
      }
      var *= inv_d;
      const double inv_std = 1.0 / std::sqrt(var + eps);
      double mean_dxhat = 0.0;
      double mean_dxhat_xhat = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        xhat[c] = (in[c] - mean) * inv_std;
        dxhat[c] = g(r, c) * gv[c];
        mean_dxhat += dxhat[c];
        mean_dxhat_xhat += dxhat[c] * xhat[c];
      }
      mean_dxhat *= inv_d;
      mean_dxhat_xhat *= inv_d;
      if (tp.requires_grad(ix)) {
        auto gx = tp.grad_mut(ix).row(r);
        for (std::size_t c = 0; c < d; ++c) {
          gx[c] += inv_std * (dxhat[c] - mean_dxhat - xhat[c] * mean_dxhat_xhat);
        }
      }
      if (tp.requires_grad(ig)) {
        Tensor& gg = tp.grad_mut(ig);
        for (std::size_t c = 0; c < d; ++c) {
          gg[c] += g(r, c) * xhat[c];
        }
      }
      if (tp.requires_grad(ib)) {
        Tensor& gb = tp.grad_mut(ib);
        for (std::size_t c = 0; c < d; ++c) {
          gb[c] += g(r, c);
        }
      }
    }
  });
}

Var additive_scores(Var q, Var k, Var w) {
  Tape& t = tape_of(q, k);
  tape_of(q, w);
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& wv = w.value();
  const std::size_t dim = qv.cols();
  if (kv.cols() != dim || wv.rows() != dim || wv.cols() != 1) {
    throw InvalidInput("additive_scores: q " + qv.shape_string() + ", k " + kv.shape_string() + ", w " +
                       wv.shape_string() + " do not share the attention dimension");
  }
  Tensor out(qv.rows(), kv.rows());
  for (std::size_t i = 0; i < qv.rows(); ++i) {
    const double* qr = qv.row(i).data();
    for (std::size_t j = 0; j < kv.rows(); ++j) {
      const double* kr = kv.row(j).data();
      double s = 0.0;
      for (std::size_t a = 0; a < dim; ++a) {
        s += wv[a] * std::tanh(qr[a] + kr[a]);
      }
      out(i, j) = s;
    }
  }
  const std::size_t iq = q.id();
  const std::size_t ik = k.id();
  const std::size_t iw = w.id();
  return t.record("additive_scores", std::move(out), {iq, ik, iw}, [iq, ik, iw](Tape& tp, std::size_t self) {
    const Tensor& qv2 = tp.value(iq);
    const Tensor& kv2 = tp.value(ik);
    const Tensor& wv2 = tp.value(iw);
    const Tensor& g = tp.grad(self);
    const std::size_t dim2 = qv2.cols();
    Tensor* gq = tp.requires_grad(iq) ? &tp.grad_mut(iq) : nullptr;
    Tensor* gk = tp.requires_grad(ik) ? &tp.grad_mut(ik) : nullptr;
    Tensor* gw = tp.requires_grad(iw) ? &tp.grad_mut(iw) : nullptr;
    for (std::size_t i = 0; i < qv2.rows(); ++i) {
      for (std::size_t j = 0; j < kv2.rows(); ++j) {
        const double gij = g(i, j);
        if (gij == 0.0) {
          continue;
        }
        for (std::size_t a = 0; a < dim2; ++a) {
          const double th = std::tanh(qv2(i, a) + kv2(j, a));
          if (gw != nullptr) {
            (*gw)[a] += gij * th;
          }
          const double dpre = gij * wv2[a] * (1.0 - th * th);
          if (gq != nullptr) {
            (*gq)(i, a) += dpre;
          }
          if (gk != nullptr) {
            (*gk)(j, a) += dpre;
          }
        }
      }
    }
  });
}

Var neg_log_prob(Var probs, std::size_t index, double floor) {
  Tape& t = tape_of(probs);
  const Tensor& p = probs.value();
  if (p.rows() != 1 || index >= p.cols()) {
    throw InvalidInput("neg_log_prob: index " + std::to_string(index) + " out of range for " + p.shape_string());
  }
  const double pi = p[index];
  const bool floored = !(pi > floor);
  const double value = -std::log(floored ? floor : pi);
  const std::size_t ip = probs.id();
  return t.record("neg_log_prob", Tensor(1, 1, value), {ip}, [ip, index, floored](Tape& tp, std::size_t self) {
    if (floored) {
      return;
    }
    tp.grad_mut(ip)[index] += -tp.grad(self)[0] / tp.value(ip)[index];
  });
}

Var bce_with_logits(Var logits, std::span<const std::uint8_t> targets) {
  Tape& t = tape_of(logits);
  const Tensor& z = logits.value();
  if (z.cols() != 1 || z.rows() != targets.size() || z.rows() == 0) {
    throw InvalidInput("bce_with_logits: logits " + z.shape_string() + " vs " + std::to_string(targets.size()) +
                       " targets");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const double x = z[i];
    const double y = targets[i] != 0 ? 1.0 : 0.0;
    // log(1 + exp(-|x|)) + max(x, 0) - x*y
    total += std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0) - x * y;
  }
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  std::vector<std::uint8_t> tgt(targets.begin(), targets.end());
  const std::size_t il = logits.id();
  return t.record("bce_with_logits", Tensor(1, 1, total * inv_n), {il}, [il, tgt, inv_n](Tape& tp, std::size_t self) {
    const Tensor& zv = tp.value(il);
    const double g = tp.grad(self)[0];
    Tensor& gz = tp.grad_mut(il);
    for (std::size_t i = 0; i < zv.rows(); ++i) {
      const double x = zv[i];
      const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      gz[i] += g * inv_n * (s - (tgt[i] != 0 ? 1.0 : 0.0));
    }
  });
}

}  // namespace gtp::ops
