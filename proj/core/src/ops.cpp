#include "tmm/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kernels.hpp"
#include "tmm/error.hpp"

namespace tmm::ops {

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw Error(ErrorKind::ShapeMismatch,
              std::string(op) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

void require_matrix(const char* op, const Tensor& t) {
  if (t.rank() != 2) {
    throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": expected a matrix, got " +
                                              shape_string(t.shape()));
  }
}

void accumulate(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Gradient of `self` as read-only span; non-empty whenever backward runs.
std::span<const double> out_grad(Tape& tape, std::size_t self) { return tape.grad(self); }

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix("matmul", av);
  require_matrix("matmul", bv);
  if (av.cols() != bv.rows()) shape_error("matmul", av.shape(), bv.shape());
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out({m, n});
  kernels::gemm_nn(av.values().data(), bv.values().data(), out.values().data(), m, k, n);
  const std::size_t ia = a.index(), ib = b.index();
  const Var inputs[] = {a, b};
  return a.tape().record(OpTag::Matmul, inputs, std::move(out), [ia, ib, m, k, n](Tape& t, std::size_t self) {
    auto dc = out_grad(t, self);
    if (t.requires_grad(ia)) {
      kernels::gemm_nt(dc.data(), t.value(ib).values().data(), t.grad(ia).data(), m, n, k);
    }
    if (t.requires_grad(ib)) {
      kernels::gemm_tn(t.value(ia).values().data(), dc.data(), t.grad(ib).data(), k, m, n);
    }
  });
}

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) shape_error("add", av.shape(), bv.shape());
  Tensor out = av;
  out.drop_grad();
  accumulate(out.values(), bv.values());
  const std::size_t ia = a.index(), ib = b.index();
  const Var inputs[] = {a, b};
  return a.tape().record(OpTag::Add, inputs, std::move(out), [ia, ib](Tape& t, std::size_t self) {
    auto g = out_grad(t, self);
    if (t.requires_grad(ia)) accumulate(t.grad(ia), g);
    if (t.requires_grad(ib)) accumulate(t.grad(ib), g);
  });
}

Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.size() != xv.cols() || bv.rows() != 1) shape_error("add_bias", xv.shape(), bv.shape());
  Tensor out(xv.shape());
  const std::size_t rows = xv.rows(), cols = xv.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xv[r * cols + c] + bv[c];
  }
  const std::size_t ix = x.index(), ib = bias.index();
  const Var inputs[] = {x, bias};
  return x.tape().record(OpTag::AddBias, inputs, std::move(out), [ix, ib, rows, cols](Tape& t, std::size_t self) {
    auto g = out_grad(t, self);
    if (t.requires_grad(ix)) accumulate(t.grad(ix), g);
    if (t.requires_grad(ib)) {
      auto gb = t.grad(ib);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
      }
    }
  });
}

Var mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) shape_error("mul", av.shape(), bv.shape());
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const std::size_t ia = a.index(), ib = b.index();
  const Var inputs[] = {a, b};
  return a.tape().record(OpTag::Mul, inputs, std::move(out), [ia, ib](Tape& t, std::size_t self) {
    auto g = out_grad(t, self);
    if (t.requires_grad(ia)) {
      auto ga = t.grad(ia);
      const Tensor& bv = t.value(ib);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(ib)) {
      auto gb = t.grad(ib);
      const Tensor& av = t.value(ia);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var x, double factor) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * factor;
  const std::size_t ix = x.index();
  const Var inputs[] = {x};
  return x.tape().record(OpTag::Scale, inputs, std::move(out), [ix, factor](Tape& t, std::size_t self) {
    auto g = out_grad(t, self);
    auto gx = t.grad(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * factor;
  });
}

Var gelu(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * xv[i] * (1.0 + std::erf(xv[i] * inv_sqrt2));
  }
  const std::size_t ix = x.index();
  const Var inputs[] = {x};
  return x.tape().record(OpTag::Gelu, inputs, std::move(out), [ix](Tape& t, std::size_t self) {
    constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto g = out_grad(t, self);
    auto gx = t.grad(ix);
    const Tensor& xv = t.value(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double v = xv[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      gx[i] += g[i] * (cdf + v * pdf);
    }
  });
}

Var softmax_rows(Var x) {
  const Tensor& xv = x.value();
  if (!xv.all_finite()) throw Error(ErrorKind::NonFiniteInput, "softmax_rows input contains NaN/Inf");
  Tensor out(xv.shape());
  const std::size_t rows = xv.rows(), cols = xv.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    auto in = xv.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - mx);
      total += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  const std::size_t ix = x.index();
  const Var inputs[] = {x};
  return x.tape().record(OpTag::SoftmaxRows, inputs, std::move(out), [ix, rows, cols](Tape& t, std::size_t self) {
    auto g = out_grad(t, self);
    auto gx = t.grad(ix);
    const Tensor& y = t.value(self);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        gx[r * cols + c] += y[r * cols + c] * (g[r * cols + c] - dot);
      }
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "layer_norm eps must be > 0");
  const Tensor& xv = x.value();
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  const std::size_t rows = xv.rows(), d = xv.cols();
  if (gv.size() != d || gv.rows() != 1) shape_error("layer_norm", xv.shape(), gv.shape());
  if (bv.size() != d || bv.rows() != 1) shape_error("layer_norm", xv.shape(), bv.shape());

  Tensor out(xv.shape());
  std::vector<double> normalized(xv.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto in = xv.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (std::size_t c = 0; c < d; ++c) {
      const double xhat = (in[c] - mean) * inv;
      normalized[r * d + c] = xhat;
      out[r * d + c] = xhat * gv[c] + bv[c];
    }
  }
  const std::size_t ix = x.index(), ig = gain.index(), ib = bias.index();
  const Var inputs[] = {x, gain, bias};
  return x.tape().record(
      OpTag::LayerNorm, inputs, std::move(out),
      [ix, ig, ib, rows, d, normalized = std::move(normalized), inv_std = std::move(inv_std)](Tape& t,
                                                                                          std::size_t self) {
        auto g = out_grad(t, self);
        if (t.requires_grad(ix)) {
          auto gx = t.grad(ix);
          const Tensor& gv = t.value(ig);
          const double dd = static_cast<double>(d);
          std::vector<double> dxhat(d);
          for (std::size_t r = 0; r < rows; ++r) {
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              dxhat[c] = g[r * d + c] * gv[c];
              sum_dxhat += dxhat[c];
              sum_dxhat_xhat += dxhat[c] * normalized[r * d + c];
            }
            const double k = inv_std[r] / dd;
            for (std::size_t c = 0; c < d; ++c) {
              gx[r * d + c] += k * (dd * dxhat[c] - sum_dxhat - normalized[r * d + c] * sum_dxhat_xhat);
            }
          }
        }
        if (t.requires_grad(ig)) {
          auto gg = t.grad(ig);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < d; ++c) gg[c] += g[r * d + c] * normalized[r * d + c];
          }
        }
        if (t.requires_grad(ib)) {
          auto gb = t.grad(ib);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < d; ++c) gb[c] += g[r * d + c];
          }
        }
      });
}

Var embedding_lookup(Var table, std::span<const std::uint32_t> ids) {
  const Tensor& tv = table.value();
  require_matrix("embedding_lookup", tv);
  if (ids.empty()) throw Error(ErrorKind::ShapeMismatch, "embedding_lookup: empty id sequence");
  const std::size_t vocab = tv.rows(), d = tv.cols();
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab) {
      throw Error(ErrorKind::IdOutOfRange,
                  "token id " + std::to_string(ids[i]) + " >= table rows " + std::to_string(vocab));
    }
    std::copy_n(tv.row(ids[i]).begin(), d, out.row(i).begin());
  }
  const std::size_t it = table.index();
  std::vector<std::uint32_t> saved(ids.begin(), ids.end());
  const Var inputs[] = {table};
  return table.tape().record(OpTag::EmbeddingLookup, inputs, std::move(out),
                             [it, d, saved = std::move(saved)](Tape& t, std::size_t self) {
                               auto g = out_grad(t, self);
                               auto gt = t.grad(it);
                               for (std::size_t i = 0; i < saved.size(); ++i) {
                                 for (std::size_t c = 0; c < d; ++c) gt[saved[i] * d + c] += g[i * d + c];
                               }
                             });
}

Var dropout(Var x, double p, std::uint64_t seed, bool train) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "dropout rate must be in [0,1)");
  if (!train || p == 0.0) return x;
  const Tensor& xv = x.value();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - p);
  const double kept_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(xv.size());
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = keep(rng) ? kept_scale : 0.0;
    out[i] = xv[i] * mask[i];
  }
  const std::size_t ix = x.index();
  const Var inputs[] = {x};
  return x.tape().record(OpTag::Dropout, inputs, std::move(out),
                         [ix, mask = std::move(mask)](Tape& t, std::size_t self) {
                           auto g = out_grad(t, self);
                           auto gx = t.grad(ix);
                           for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * mask[i];
                         });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorKind::ShapeMismatch, "concat_rows: no inputs");
  const std::size_t cols = parts.front().value().cols();
  std::size_t rows = 0;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    if (v.cols() != cols) shape_error("concat_rows", parts.front().shape(), v.shape());
    offsets.push_back(rows);
    rows += v.rows();
  }
  Tensor out({rows, cols});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    std::copy(v.values().begin(), v.values().end(), out.values().begin() + offsets[k] * cols);
  }
  std::vector<std::size_t> idx;
  for (const Var& p : parts) idx.push_back(p.index());
  return parts.front().tape().record(
      OpTag::ConcatRows, parts, std::move(out),
      [idx = std::move(idx), offsets = std::move(offsets), cols](Tape& t, std::size_t self) {
        auto g = out_grad(t, self);
        for (std::size_t k = 0; k < idx.size(); ++k) {
          if (!t.requires_grad(idx[k])) continue;
          auto gk = t.grad(idx[k]);
          accumulate(gk, g.subspan(offsets[k] * cols, gk.size()));
        }
      });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  if (begin >= end || end > xv.rows()) {
    throw Error(ErrorKind::IndexOutOfRange, "slice_rows [" + std::to_string(begin) + "," +
                                                std::to_string(end) + ") of " + shape_string(xv.shape()));
  }
  const std::size_t cols = xv.cols();
  Tensor out({end - begin, cols},
             std::vector<double>(xv.values().begin() + begin * cols, xv.values().begin() + end * cols));
  const std::size_t ix = x.index();
  const Var inputs[] = {x};
  return x.tape().record(OpTag::SliceRows, inputs, std::move(out), [ix, begin, cols](Tape& t, std::size_t self) {
    auto g = out_grad(t, self);
    accumulate(t.grad(ix).subspan(begin * cols, g.size()), g);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorKind::ShapeMismatch, "concat_cols: no inputs");
  const std::size_t rows = parts.front().value().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> offsets, widths, idx;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    require_matrix("concat_cols", v);
    if (v.rows() != rows) shape_error("concat_cols", parts.front().shape(), v.shape());
    offsets.push_back(cols);
    widths.push_back(v.cols());
    idx.push_back(p.index());
    cols += v.cols();
  }
  Tensor out({rows, cols});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.row(r).begin(), widths[k], out.row(r).begin() + offsets[k]);
    }
  }
  return parts.front().tape().record(
      OpTag::ConcatCols, parts, std::move(out),
      [idx = std::move(idx), offsets = std::move(offsets), widths = std::move(widths), rows, cols](
          Tape& t, std::size_t self) {
        auto g = out_grad(t, self);
        for (std::size_t k = 0; k < idx.size(); ++k) {
          if (!t.requires_grad(idx[k])) continue;
          auto gk = t.grad(idx[k]);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < widths[k]; ++c) gk[r * widths[k] + c] += g[r * cols + offsets[k] + c];
          }
        }
      });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  require_matrix("slice_cols", xv);
  if (begin >= end || end > xv.cols()) {
    throw Error(ErrorKind::IndexOutOfRange, "slice_cols [" + std::to_string(begin) + "," +
                                                std::to_string(end) + ") of " + shape_string(xv.shape()));
  }
  const std::size_t rows = xv.rows(), cols = xv.cols(), width = end - begin;
  Tensor out({rows, width});
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(xv.row(r).begin() + begin, width, out.row(r).begin());
  const std::size_t ix = x.index();
  const Var inputs[] = {x};
  return x.tape().record(OpTag::SliceCols, inputs, std::move(out),
                         [ix, begin, rows, cols, width](Tape& t, std::size_t self) {
                           auto g = out_grad(t, self);
                           auto gx = t.grad(ix);
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t c = 0; c < width; ++c) gx[r * cols + begin + c] += g[r * width + c];
                           }
                         });
}

Var transpose(Var x) {
  const Tensor& xv = x.value();
  require_matrix("transpose", xv);
  const std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor out({cols, rows});
  kernels::transpose(xv.values().data(), out.values().data(), rows, cols);
  const std::size_t ix = x.index();
  const Var inputs[] = {x};
  return x.tape().record(OpTag::Transpose, inputs, std::move(out), [ix, rows, cols](Tape& t, std::size_t self) {
    auto g = out_grad(t, self);
    auto gx = t.grad(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[c * rows + r];
    }
  });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
  const Tensor& xv = x.value();
  if (rows.empty()) throw Error(ErrorKind::ShapeMismatch, "gather_rows: empty row list");
  const std::size_t cols = xv.cols();
  Tensor out({rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= xv.rows()) {
      throw Error(ErrorKind::IndexOutOfRange,
                  "gather_rows: row " + std::to_string(rows[i]) + " of " + shape_string(xv.shape()));
    }
    std::copy_n(xv.row(rows[i]).begin(), cols, out.row(i).begin());
  }
  const std::size_t ix = x.index();
  std::vector<std::size_t> saved(rows.begin(), rows.end());
  const Var inputs[] = {x};
  return x.tape().record(OpTag::GatherRows, inputs, std::move(out),
                         [ix, cols, saved = std::move(saved)](Tape& t, std::size_t self) {
                           auto g = out_grad(t, self);
                           auto gx = t.grad(ix);
                           for (std::size_t i = 0; i < saved.size(); ++i) {
                             for (std::size_t c = 0; c < cols; ++c) gx[saved[i] * cols + c] += g[i * cols + c];
                           }
                         });
}

Var sum(Var x) {
  const Tensor& xv = x.value();
  double total = 0.0;
  for (double v : xv.values()) total += v;
  const std::size_t ix = x.index();
  const Var inputs[] = {x};
  return x.tape().record(OpTag::Sum, inputs, Tensor({1}, std::vector<double>{total}),
                         [ix](Tape& t, std::size_t self) {
                           const double g = out_grad(t, self)[0];
                           for (double& v : t.grad(ix)) v += g;
                         });
}

NllResult nll_rows(Var probs, std::span<const std::size_t> targets, double floor) {
  const Tensor& pv = probs.value();
  if (pv.rows() != targets.size()) {
    throw Error(ErrorKind::ShapeMismatch, "nll_rows: " + std::to_string(targets.size()) +
                                              " targets for probabilities " + shape_string(pv.shape()));
  }
  const std::size_t cols = pv.cols();
  NllResult result;
  result.per_row.resize(targets.size());
  std::vector<bool> clipped(targets.size(), false);
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= cols) {
      throw Error(ErrorKind::IndexOutOfRange, "nll_rows: target class " + std::to_string(targets[i]));
    }
    double p = pv[i * cols + targets[i]];
    if (p < floor) {
      p = floor;
      clipped[i] = true;
      ++result.clipped;
    }
    result.per_row[i] = -std::log(p);
    total += result.per_row[i];
  }
  const std::size_t ip = probs.index();
  std::vector<std::size_t> saved(targets.begin(), targets.end());
  const Var inputs[] = {probs};
  result.total = probs.tape().record(
      OpTag::NllRows, inputs, Tensor({1}, std::vector<double>{total}),
      [ip, cols, saved = std::move(saved), clipped = std::move(clipped)](Tape& t, std::size_t self) {
        const double g = out_grad(t, self)[0];
        auto gp = t.grad(ip);
        const Tensor& pv = t.value(ip);
        for (std::size_t i = 0; i < saved.size(); ++i) {
          if (clipped[i]) continue;
          const std::size_t at = i * cols + saved[i];
          gp[at] -= g / pv[at];
        }
      });
  return result;
}

}  // namespace tmm::ops
