#include "gnids/layers.hpp"

#include <algorithm>
#include <cmath>

#include "gnids/error.hpp"

namespace gnids {

namespace {

Tape& tape_of(Var a) {
  if (!a.tape) throw UsageError("operation on unbound Var");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape || !a.tape) throw UsageError("operands live on different tapes");
  return *a.tape;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + t.shape_string());
}

template <typename F>
Var unary(Var x, const char* op, F&& forward_elem, Tape::BackwardFn bw) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  Tensor out = Tensor::zeros_like(xv);
  auto in = xv.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = forward_elem(in[i]);
  return t.record(std::move(out), x.requires_grad(), std::move(bw), op);
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "matmul");
  require_matrix(bv, "matmul");
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: shape mismatch " + av.shape_string() + " * " + bv.shape_string());
  }
  Tensor out(av.rows(), bv.cols());
  kernel::matmul(av, bv, out);
  const auto ia = a.id, ib = b.id;
  const bool ga = a.requires_grad(), gb = b.requires_grad();
  return t.record(std::move(out), ga || gb,
                  [ia, ib, ga, gb](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    if (ga) kernel::matmul_nt_acc(g, tp.value(ib), tp.grad(ia));
                    if (gb) kernel::matmul_tn_acc(tp.value(ia), g, tp.grad(ib));
                  },
                  "matmul");
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  kernel::axpy(1.0, b.value().data(), out.data());
  const auto ia = a.id, ib = b.id;
  const bool ga = a.requires_grad(), gb = b.requires_grad();
  return t.record(std::move(out), ga || gb,
                  [ia, ib, ga, gb](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    if (ga) kernel::axpy(1.0, g.data(), tp.grad(ia).data());
                    if (gb) kernel::axpy(1.0, g.data(), tp.grad(ib).data());
                  },
                  "add");
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  kernel::axpy(-1.0, b.value().data(), out.data());
  const auto ia = a.id, ib = b.id;
  const bool ga = a.requires_grad(), gb = b.requires_grad();
  return t.record(std::move(out), ga || gb,
                  [ia, ib, ga, gb](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    if (ga) kernel::axpy(1.0, g.data(), tp.grad(ia).data());
                    if (gb) kernel::axpy(-1.0, g.data(), tp.grad(ib).data());
                  },
                  "sub");
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  const auto ia = a.id, ib = b.id;
  const bool ga = a.requires_grad(), gb = b.requires_grad();
  return t.record(std::move(out), ga || gb,
                  [ia, ib, ga, gb](Tape& tp, std::uint32_t self) {
                    auto g = tp.grad(self).data();
                    if (ga) {
                      auto da = tp.grad(ia).data();
                      auto bv = tp.value(ib).data();
                      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv[i];
                    }
                    if (gb) {
                      auto db = tp.grad(ib).data();
                      auto av = tp.value(ia).data();
                      for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * av[i];
                    }
                  },
                  "mul");
}

Var scale(Var a, double s) {
  const auto ia = a.id;
  return unary(
      a, "scale", [s](double v) { return s * v; },
      [ia, s](Tape& tp, std::uint32_t self) {
        kernel::axpy(s, tp.grad(self).data(), tp.grad(ia).data());
      });
}

Var one_minus(Var a) {
  const auto ia = a.id;
  return unary(
      a, "one_minus", [](double v) { return 1.0 - v; },
      [ia](Tape& tp, std::uint32_t self) {
        kernel::axpy(-1.0, tp.grad(self).data(), tp.grad(ia).data());
      });
}

Var relu(Var x) {
  const auto ix = x.id;
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [ix](Tape& tp, std::uint32_t self) {
        auto g = tp.grad(self).data();
        auto in = tp.value(ix).data();
        auto d = tp.grad(ix).data();
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (in[i] > 0.0) d[i] += g[i];
        }
      });
}

Var sigmoid(Var x) {
  const auto ix = x.id;
  return unary(
      x, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [ix](Tape& tp, std::uint32_t self) {
        auto g = tp.grad(self).data();
        auto y = tp.value(self).data();
        auto d = tp.grad(ix).data();
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * y[i] * (1.0 - y[i]);
      });
}

Var tanh_act(Var x) {
  const auto ix = x.id;
  return unary(
      x, "tanh", [](double v) { return std::tanh(v); },
      [ix](Tape& tp, std::uint32_t self) {
        auto g = tp.grad(self).data();
        auto y = tp.value(self).data();
        auto d = tp.grad(ix).data();
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * (1.0 - y[i] * y[i]);
      });
}

Var sum(Var x) {
  Tape& t = tape_of(x);
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const auto ix = x.id;
  return t.record(Tensor::scalar(s), x.requires_grad(),
                  [ix](Tape& tp, std::uint32_t self) {
                    const double g = tp.grad(self)[0];
                    for (double& d : tp.grad(ix).data()) d += g;
                  },
                  "sum");
}

Var dot(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "dot");
  double s = 0.0;
  auto av = a.value().data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  const auto ia = a.id, ib = b.id;
  const bool ga = a.requires_grad(), gb = b.requires_grad();
  return t.record(Tensor::scalar(s), ga || gb,
                  [ia, ib, ga, gb](Tape& tp, std::uint32_t self) {
                    const double g = tp.grad(self)[0];
                    // Accumulate one side at a time so dot(w, w) gets 2w.
                    if (ga) kernel::axpy(g, tp.value(ib).data(), tp.grad(ia).data());
                    if (gb) kernel::axpy(g, tp.value(ia).data(), tp.grad(ib).data());
                  },
                  "dot");
}

Var add_bias(Var x, Var b) {
  Tape& t = tape_of(x, b);
  const Tensor& xv = x.value();
  const Tensor& bv = b.value();
  require_matrix(xv, "add_bias");
  if (bv.size() != xv.cols()) {
    throw ShapeError("add_bias: shape mismatch " + xv.shape_string() + " + " + bv.shape_string());
  }
  Tensor out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) kernel::axpy(1.0, bv.data(), out.row(r));
  const auto ix = x.id, ib = b.id;
  const bool gx = x.requires_grad(), gb = b.requires_grad();
  return t.record(std::move(out), gx || gb,
                  [ix, ib, gx, gb](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    if (gx) kernel::axpy(1.0, g.data(), tp.grad(ix).data());
                    if (gb) {
                      auto db = tp.grad(ib).data();
                      for (std::size_t r = 0; r < g.rows(); ++r) kernel::axpy(1.0, g.row(r), db);
                    }
                  },
                  "add_bias");
}

Var dense(Var input, Var weights, Var bias, Activation activation) {
  Tape& t = tape_of(input, weights);
  if (bias.tape != &t) throw UsageError("dense: bias lives on a different tape");
  const Tensor& x = input.value();
  const Tensor& w = weights.value();
  const Tensor& b = bias.value();
  if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.rows() || b.size() != w.cols()) {
    throw ShapeError("dense: shape mismatch input " + x.shape_string() + " weights " +
                     w.shape_string() + " bias " + b.shape_string());
  }
  Tensor out(x.rows(), w.cols());
  kernel::matmul(x, w, out);
  for (std::size_t r = 0; r < out.rows(); ++r) kernel::axpy(1.0, b.data(), out.row(r));
  if (activation == Activation::ReLU) {
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  } else if (activation == Activation::Softmax) {
    out = softmax_rows(out);
  }

  const auto ix = input.id, iw = weights.id, ib = bias.id;
  const bool gx = input.requires_grad(), gw = weights.requires_grad(), gb = bias.requires_grad();
  return t.record(
      std::move(out), gx || gw || gb,
      [ix, iw, ib, gx, gw, gb, activation](Tape& tp, std::uint32_t self) {
        const Tensor& y = tp.value(self);
        Tensor dz = tp.grad(self);
        if (activation == Activation::ReLU) {
          auto d = dz.data();
          auto yv = y.data();
          for (std::size_t i = 0; i < d.size(); ++i) {
            if (!(yv[i] > 0.0)) d[i] = 0.0;
          }
        } else if (activation == Activation::Softmax) {
          for (std::size_t r = 0; r < dz.rows(); ++r) {
            auto d = dz.row(r);
            auto s = y.row(r);
            double inner = 0.0;
            for (std::size_t j = 0; j < d.size(); ++j) inner += d[j] * s[j];
            for (std::size_t j = 0; j < d.size(); ++j) d[j] = s[j] * (d[j] - inner);
          }
        }
        if (gx) kernel::matmul_nt_acc(dz, tp.value(iw), tp.grad(ix));
        if (gw) kernel::matmul_tn_acc(tp.value(ix), dz, tp.grad(iw));
        if (gb) {
          auto db = tp.grad(ib).data();
          for (std::size_t r = 0; r < dz.rows(); ++r) kernel::axpy(1.0, dz.row(r), db);
        }
      },
      "dense");
}

Var gather_rows(Var x, std::vector<std::uint32_t> rows) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  require_matrix(xv, "gather_rows");
  const std::size_t n = xv.cols();
  Tensor out(rows.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= xv.rows()) throw ShapeError("gather_rows: row index out of range");
    std::copy_n(xv.row(rows[i]).begin(), n, out.row(i).begin());
  }
  const auto ix = x.id;
  return t.record(std::move(out), x.requires_grad(),
                  [ix, rows = std::move(rows)](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    Tensor& d = tp.grad(ix);
                    for (std::size_t i = 0; i < rows.size(); ++i) {
                      kernel::axpy(1.0, g.row(i), d.row(rows[i]));
                    }
                  },
                  "gather_rows");
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  require_matrix(xv, "slice_rows");
  if (begin > end || end > xv.rows()) throw ShapeError("slice_rows: range out of bounds");
  const std::size_t n = xv.cols();
  Tensor out(end - begin, n);
  std::copy(xv.data().begin() + static_cast<long>(begin * n),
            xv.data().begin() + static_cast<long>(end * n), out.data().begin());
  const auto ix = x.id;
  return t.record(std::move(out), x.requires_grad(),
                  [ix, begin, n](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    auto d = tp.grad(ix).data().subspan(begin * n, g.size());
                    kernel::axpy(1.0, g.data(), d);
                  },
                  "slice_rows");
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw UsageError("concat_rows: no parts");
  Tape& t = tape_of(parts.front());
  const std::size_t n = parts.front().value().cols();
  std::size_t rows = 0;
  bool any_grad = false;
  for (const auto& p : parts) {
    if (p.tape != &t) throw UsageError("concat_rows: parts live on different tapes");
    require_matrix(p.value(), "concat_rows");
    if (p.value().cols() != n) {
      throw ShapeError("concat_rows: column mismatch " + parts.front().value().shape_string() +
                       " vs " + p.value().shape_string());
    }
    rows += p.value().rows();
    any_grad = any_grad || p.requires_grad();
  }
  Tensor out(rows, n);
  std::size_t offset = 0;
  std::vector<std::uint32_t> ids;
  for (const auto& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + static_cast<long>(offset));
    offset += p.value().size();
    ids.push_back(p.id);
  }
  return t.record(std::move(out), any_grad,
                  [ids = std::move(ids)](Tape& tp, std::uint32_t self) {
                    auto g = tp.grad(self).data();
                    std::size_t off = 0;
                    for (auto id : ids) {
                      const std::size_t len = tp.value(id).size();
                      if (tp.requires_grad(id)) {
                        kernel::axpy(1.0, g.subspan(off, len), tp.grad(id).data());
                      }
                      off += len;
                    }
                  },
                  "concat_rows");
}

Var concat_cols(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "concat_cols");
  require_matrix(bv, "concat_cols");
  if (av.rows() != bv.rows()) {
    throw ShapeError("concat_cols: row mismatch " + av.shape_string() + " vs " + bv.shape_string());
  }
  const std::size_t na = av.cols(), nb = bv.cols();
  Tensor out(av.rows(), na + nb);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    std::copy_n(av.row(r).begin(), na, out.row(r).begin());
    std::copy_n(bv.row(r).begin(), nb, out.row(r).begin() + static_cast<long>(na));
  }
  const auto ia = a.id, ib = b.id;
  const bool ga = a.requires_grad(), gb = b.requires_grad();
  return t.record(std::move(out), ga || gb,
                  [ia, ib, ga, gb, na, nb](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    for (std::size_t r = 0; r < g.rows(); ++r) {
                      auto gr = g.row(r);
                      if (ga) kernel::axpy(1.0, gr.subspan(0, na), tp.grad(ia).row(r));
                      if (gb) kernel::axpy(1.0, gr.subspan(na, nb), tp.grad(ib).row(r));
                    }
                  },
                  "concat_cols");
}

Var segment_mean(Var messages, std::vector<std::uint32_t> segment_ids, std::size_t segment_count) {
  Tape& t = tape_of(messages);
  const Tensor& m = messages.value();
  require_matrix(m, "segment_mean");
  if (segment_ids.size() != m.rows()) {
    throw ShapeError("segment_mean: " + std::to_string(segment_ids.size()) +
                     " ids for messages " + m.shape_string());
  }
  const std::size_t n = m.cols();
  std::vector<double> counts(segment_count, 0.0);
  for (auto id : segment_ids) {
    if (id >= segment_count) {
      throw ShapeError("segment_mean: segment id " + std::to_string(id) + " out of range [0, " +
                       std::to_string(segment_count) + ")");
    }
    counts[id] += 1.0;
  }
  Tensor out(segment_count, n);
  for (std::size_t e = 0; e < segment_ids.size(); ++e) {
    kernel::axpy(1.0, m.row(e), out.row(segment_ids[e]));
  }
  for (std::size_t s = 0; s < segment_count; ++s) {
    if (counts[s] > 0.0) {
      const double inv = 1.0 / counts[s];
      for (double& v : out.row(s)) v *= inv;
    }
  }
  const auto im = messages.id;
  return t.record(std::move(out), messages.requires_grad(),
                  [im, ids = std::move(segment_ids), counts = std::move(counts)](
                      Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    Tensor& d = tp.grad(im);
                    for (std::size_t e = 0; e < ids.size(); ++e) {
                      kernel::axpy(1.0 / counts[ids[e]], g.row(ids[e]), d.row(e));
                    }
                  },
                  "segment_mean");
}

Tensor softmax_rows(const Tensor& logits) {
  Tensor out = logits;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : row) v /= z;
  }
  return out;
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  Tape& t = tape_of(logits);
  const Tensor& z = logits.value();
  require_matrix(z, "softmax_cross_entropy");
  if (labels.size() != z.rows()) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for logits " + z.shape_string());
  }
  if (z.rows() == 0) throw ShapeError("softmax_cross_entropy: empty batch");
  const std::size_t c = z.cols();
  Tensor probs = softmax_rows(z);
  double loss = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw UsageError("softmax_cross_entropy: label " + std::to_string(y) +
                       " out of range [0, " + std::to_string(c) + ")");
    }
    auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    loss += (mx + std::log(s)) - row[static_cast<std::size_t>(y)];
  }
  const double inv_batch = 1.0 / static_cast<double>(z.rows());
  loss *= inv_batch;
  std::vector<int> ys(labels.begin(), labels.end());
  const auto iz = logits.id;
  return t.record(Tensor::scalar(loss), logits.requires_grad(),
                  [iz, probs = std::move(probs), ys = std::move(ys), inv_batch](
                      Tape& tp, std::uint32_t self) {
                    const double g = tp.grad(self)[0] * inv_batch;
                    Tensor& d = tp.grad(iz);
                    for (std::size_t r = 0; r < probs.rows(); ++r) {
                      auto dr = d.row(r);
                      auto pr = probs.row(r);
                      for (std::size_t j = 0; j < pr.size(); ++j) dr[j] += g * pr[j];
                      dr[static_cast<std::size_t>(ys[r])] -= g;
                    }
                  },
                  "softmax_cross_entropy");
}

Var gru_cell(Var state, Var input, const GruWeights& w) {
  const Tensor& h = state.value();
  const Tensor& x = input.value();
  if (h.rank() != 2 || x.rank() != 2 || h.rows() != x.rows() ||
      w.w_z.value().rows() != x.cols() || w.u_z.value().rows() != h.cols() ||
      w.u_z.value().cols() != h.cols()) {
    throw ShapeError("gru_cell: shape mismatch state " + h.shape_string() + " input " +
                     x.shape_string() + " W_z " + w.w_z.value().shape_string() + " U_z " +
                     w.u_z.value().shape_string());
  }
  Var z = sigmoid(add_bias(add(matmul(input, w.w_z), matmul(state, w.u_z)), w.b_z));
  Var r = sigmoid(add_bias(add(matmul(input, w.w_r), matmul(state, w.u_r)), w.b_r));
  Var c = tanh_act(add_bias(add(matmul(input, w.w_c), matmul(mul(r, state), w.u_c)), w.b_c));
  return add(mul(one_minus(z), state), mul(z, c));
}

}  // namespace gnids
