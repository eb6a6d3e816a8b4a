#include "pvc/nn/graph.h"

#include <algorithm>
#include <cmath>

namespace pvc::nn {
namespace {

using RowMap = Eigen::Map<Matrix>;
using ConstRowMap = Eigen::Map<const Matrix>;

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DataError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

bool any_grad(Graph& g, std::initializer_list<Var> vars) {
  if (!g.recording()) return false;
  for (Var v : vars) {
    if (g.needs_grad(v)) return true;
  }
  return false;
}

}  // namespace

SeqLayout SeqLayout::from_lengths(std::vector<int> lengths) {
  SeqLayout l;
  l.batch = static_cast<int>(lengths.size());
  l.steps = lengths.empty() ? 0 : *std::max_element(lengths.begin(), lengths.end());
  l.lengths = std::move(lengths);
  return l;
}

Matrix SeqLayout::mask() const {
  Matrix m = Matrix::Zero(rows(), 1);
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < lengths[b]; ++t) m(b * steps + t, 0) = 1.0f;
  }
  return m;
}

int SeqLayout::valid_rows() const {
  int n = 0;
  for (int len : lengths) n += len;
  return n;
}

Var Graph::constant(Matrix value) { return add_node(std::move(value), false); }

Var Graph::param(Parameter& param) {
  Node node;
  node.external = &param.value;
  node.param = &param;
  node.needs_grad = recording_;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Graph::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.external ? *n.external : n.value;
}

Var Graph::add_node(Matrix value, bool needs_grad) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = needs_grad && recording_;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Graph::set_backward(Var v, std::function<void()> fn) { nodes_[v.id].backward = std::move(fn); }

Matrix& Graph::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.param) return n.param->grad;
  if (n.grad.size() == 0) {
    const Matrix& val = value(v);
    n.grad = Matrix::Zero(val.rows(), val.cols());
  }
  return n.grad;
}

void Graph::backward(Var loss) {
  if (!recording_) throw UsageError("backward() on a graph built without recording");
  const Matrix& l = value(loss);
  if (l.rows() != 1 || l.cols() != 1) throw UsageError("backward() needs a 1x1 loss");
  grad(loss)(0, 0) += 1.0f;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.backward && n.grad.size() > 0) n.backward();
  }
}

Var matmul(Graph& g, Var a, Var b) {
  const Matrix& av = g.value(a);
  const Matrix& bv = g.value(b);
  if (av.cols() != bv.rows()) {
    throw DataError("matmul: inner dimensions " + std::to_string(av.cols()) + " and " +
                    std::to_string(bv.rows()) + " differ");
  }
  const bool ng = any_grad(g, {a, b});
  Matrix out(av.rows(), bv.cols());
  out.noalias() = av * bv;
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, a, b, o] {
      const Matrix& go = g.grad(o);
      if (g.needs_grad(a)) g.grad(a).noalias() += go * g.value(b).transpose();
      if (g.needs_grad(b)) g.grad(b).noalias() += g.value(a).transpose() * go;
    });
  }
  return o;
}

Var add(Graph& g, Var a, Var b) {
  check_same_shape(g.value(a), g.value(b), "add");
  const bool ng = any_grad(g, {a, b});
  Var o = g.add_node(g.value(a) + g.value(b), ng);
  if (ng) {
    g.set_backward(o, [&g, a, b, o] {
      const Matrix& go = g.grad(o);
      if (g.needs_grad(a)) g.grad(a) += go;
      if (g.needs_grad(b)) g.grad(b) += go;
    });
  }
  return o;
}

Var sub(Graph& g, Var a, Var b) {
  check_same_shape(g.value(a), g.value(b), "sub");
  const bool ng = any_grad(g, {a, b});
  Var o = g.add_node(g.value(a) - g.value(b), ng);
  if (ng) {
    g.set_backward(o, [&g, a, b, o] {
      const Matrix& go = g.grad(o);
      if (g.needs_grad(a)) g.grad(a) += go;
      if (g.needs_grad(b)) g.grad(b) -= go;
    });
  }
  return o;
}

Var mul(Graph& g, Var a, Var b) {
  check_same_shape(g.value(a), g.value(b), "mul");
  const bool ng = any_grad(g, {a, b});
  Var o = g.add_node(g.value(a).cwiseProduct(g.value(b)), ng);
  if (ng) {
    g.set_backward(o, [&g, a, b, o] {
      const Matrix& go = g.grad(o);
      if (g.needs_grad(a)) g.grad(a) += go.cwiseProduct(g.value(b));
      if (g.needs_grad(b)) g.grad(b) += go.cwiseProduct(g.value(a));
    });
  }
  return o;
}

Var add_row(Graph& g, Var a, Var row) {
  const Matrix& av = g.value(a);
  const Matrix& rv = g.value(row);
  if (rv.rows() != 1 || rv.cols() != av.cols()) throw DataError("add_row: bias shape mismatch");
  const bool ng = any_grad(g, {a, row});
  Matrix out = av;
  out.rowwise() += rv.row(0);
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, a, row, o] {
      const Matrix& go = g.grad(o);
      if (g.needs_grad(a)) g.grad(a) += go;
      if (g.needs_grad(row)) g.grad(row) += go.colwise().sum();
    });
  }
  return o;
}

Var relu(Graph& g, Var a) {
  const bool ng = any_grad(g, {a});
  Var o = g.add_node(g.value(a).cwiseMax(0.0f), ng);
  if (ng) {
    g.set_backward(o, [&g, a, o] {
      g.grad(a).array() += (g.value(a).array() > 0.0f).select(g.grad(o).array(), 0.0f);
    });
  }
  return o;
}

Var sigmoid(Graph& g, Var a) {
  const bool ng = any_grad(g, {a});
  Matrix out = (1.0f + (-g.value(a).array()).exp()).inverse().matrix();
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, a, o] {
      const auto y = g.value(o).array();
      g.grad(a).array() += g.grad(o).array() * y * (1.0f - y);
    });
  }
  return o;
}

Var tanh(Graph& g, Var a) {
  const bool ng = any_grad(g, {a});
  Var o = g.add_node(g.value(a).array().tanh().matrix(), ng);
  if (ng) {
    g.set_backward(o, [&g, a, o] {
      const auto y = g.value(o).array();
      g.grad(a).array() += g.grad(o).array() * (1.0f - y * y);
    });
  }
  return o;
}

Var concat_cols(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw DataError("concat_cols: no inputs");
  const Eigen::Index rows = g.value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool ng = false;
  for (Var p : parts) {
    if (g.value(p).rows() != rows) throw DataError("concat_cols: row-count mismatch");
    cols += g.value(p).cols();
    ng = ng || (g.recording() && g.needs_grad(p));
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleCols(at, g.value(p).cols()) = g.value(p);
    at += g.value(p).cols();
  }
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, parts, o] {
      const Matrix& go = g.grad(o);
      Eigen::Index at = 0;
      for (Var p : parts) {
        const Eigen::Index c = g.value(p).cols();
        if (g.needs_grad(p)) g.grad(p) += go.middleCols(at, c);
        at += c;
      }
    });
  }
  return o;
}

Var slice_cols(Graph& g, Var a, int start, int count) {
  const Matrix& av = g.value(a);
  if (start < 0 || count < 0 || start + count > av.cols()) throw DataError("slice_cols: out of range");
  const bool ng = any_grad(g, {a});
  Var o = g.add_node(av.middleCols(start, count), ng);
  if (ng) {
    g.set_backward(o, [&g, a, o, start, count] { g.grad(a).middleCols(start, count) += g.grad(o); });
  }
  return o;
}

Var conv1d(Graph& g, Var x, Var weight, Var bias, const SeqLayout& layout, int width) {
  const Matrix& xv = g.value(x);
  const Matrix& wv = g.value(weight);
  const auto c_in = static_cast<int>(xv.cols());
  if (xv.rows() != layout.rows()) throw DataError("conv1d: input rows do not match the layout");
  if (wv.rows() != width * c_in) {
    throw DataError("conv1d: weight expects " + std::to_string(wv.rows() / std::max(width, 1)) +
                    " input channels, got " + std::to_string(c_in));
  }
  const int left = (width - 1) / 2;
  const int steps = layout.steps;
  Matrix cols = Matrix::Zero(layout.rows(), static_cast<Eigen::Index>(width) * c_in);
  for (int b = 0; b < layout.batch; ++b) {
    for (int t = 0; t < steps; ++t) {
      for (int j = 0; j < width; ++j) {
        const int src = t + j - left;
        if (layout.valid(b, src)) cols.block(b * steps + t, j * c_in, 1, c_in) = xv.row(b * steps + src);
      }
    }
  }
  Matrix out(layout.rows(), wv.cols());
  out.noalias() = cols * wv;
  out.rowwise() += g.value(bias).row(0);
  const bool ng = any_grad(g, {x, weight, bias});
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, x, weight, bias, o, layout, width, c_in, left, cols = std::move(cols)] {
      const Matrix& go = g.grad(o);
      if (g.needs_grad(weight)) g.grad(weight).noalias() += cols.transpose() * go;
      if (g.needs_grad(bias)) g.grad(bias) += go.colwise().sum();
      if (g.needs_grad(x)) {
        Matrix dcols(go.rows(), cols.cols());
        dcols.noalias() = go * g.value(weight).transpose();
        Matrix& gx = g.grad(x);
        const int steps = layout.steps;
        for (int b = 0; b < layout.batch; ++b) {
          for (int t = 0; t < steps; ++t) {
            for (int j = 0; j < width; ++j) {
              const int src = t + j - left;
              if (layout.valid(b, src)) gx.row(b * steps + src) += dcols.block(b * steps + t, j * c_in, 1, c_in);
            }
          }
        }
      }
    });
  }
  return o;
}

Var max_pool_time2(Graph& g, Var x, const SeqLayout& layout) {
  const Matrix& xv = g.value(x);
  const int steps = layout.steps;
  Matrix out = xv;
  // 1 where the right neighbour won
  Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> from_next =
      Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(xv.rows(), xv.cols());
  for (int b = 0; b < layout.batch; ++b) {
    for (int t = 0; t + 1 < layout.lengths[b]; ++t) {
      const int r = b * steps + t;
      for (Eigen::Index c = 0; c < xv.cols(); ++c) {
        if (xv(r + 1, c) > xv(r, c)) {
          out(r, c) = xv(r + 1, c);
          from_next(r, c) = 1;
        }
      }
    }
  }
  const bool ng = any_grad(g, {x});
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, x, o, from_next = std::move(from_next)] {
      const Matrix& go = g.grad(o);
      Matrix& gx = g.grad(x);
      for (Eigen::Index r = 0; r < go.rows(); ++r) {
        for (Eigen::Index c = 0; c < go.cols(); ++c) {
          if (from_next(r, c)) gx(r + 1, c) += go(r, c);
          else gx(r, c) += go(r, c);
        }
      }
    });
  }
  return o;
}

int strided_freq_out(int freq_in) { return (freq_in + 1) / 2; }

Var conv2d_time_freq(Graph& g, Var x, Var weight, Var bias, const SeqLayout& layout, int freq_in,
                     int c_in) {
  const Matrix& xv = g.value(x);
  const Matrix& wv = g.value(weight);
  if (xv.cols() != static_cast<Eigen::Index>(freq_in) * c_in) {
    throw DataError("conv2d: input width " + std::to_string(xv.cols()) + " != freq_in * c_in");
  }
  if (xv.rows() != layout.rows()) throw DataError("conv2d: input rows do not match the layout");
  if (wv.rows() != 9 * c_in) throw DataError("conv2d: weight shape mismatch");
  const int freq_out = strided_freq_out(freq_in);
  const int pad_left = std::max((freq_out - 1) * 2 + 3 - freq_in, 0) / 2;
  const int c_out = static_cast<int>(wv.cols());
  const int steps = layout.steps;
  const Eigen::Index patch_rows = static_cast<Eigen::Index>(layout.rows()) * freq_out;

  Matrix cols = Matrix::Zero(patch_rows, 9 * c_in);
  for (int b = 0; b < layout.batch; ++b) {
    for (int t = 0; t < steps; ++t) {
      for (int fo = 0; fo < freq_out; ++fo) {
        const Eigen::Index row = (static_cast<Eigen::Index>(b) * steps + t) * freq_out + fo;
        for (int dt = 0; dt < 3; ++dt) {
          const int src_t = t + dt - 1;
          if (!layout.valid(b, src_t)) continue;
          for (int df = 0; df < 3; ++df) {
            const int src_f = 2 * fo + df - pad_left;
            if (src_f < 0 || src_f >= freq_in) continue;
            cols.block(row, (dt * 3 + df) * c_in, 1, c_in) = xv.block(b * steps + src_t, src_f * c_in, 1, c_in);
          }
        }
      }
    }
  }
  Matrix prod(patch_rows, c_out);
  prod.noalias() = cols * wv;
  prod.rowwise() += g.value(bias).row(0);
  Matrix out = RowMap(prod.data(), layout.rows(), static_cast<Eigen::Index>(freq_out) * c_out);

  const bool ng = any_grad(g, {x, weight, bias});
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, x, weight, bias, o, layout, freq_in, freq_out, pad_left, c_in, c_out,
                       cols = std::move(cols)] {
      const Matrix& go_flat = g.grad(o);
      ConstRowMap go(go_flat.data(), cols.rows(), c_out);
      if (g.needs_grad(weight)) g.grad(weight).noalias() += cols.transpose() * go;
      if (g.needs_grad(bias)) g.grad(bias) += go.colwise().sum();
      if (g.needs_grad(x)) {
        Matrix dcols(cols.rows(), cols.cols());
        dcols.noalias() = go * g.value(weight).transpose();
        Matrix& gx = g.grad(x);
        const int steps = layout.steps;
        for (int b = 0; b < layout.batch; ++b) {
          for (int t = 0; t < steps; ++t) {
            for (int fo = 0; fo < freq_out; ++fo) {
              const Eigen::Index row = (static_cast<Eigen::Index>(b) * steps + t) * freq_out + fo;
              for (int dt = 0; dt < 3; ++dt) {
                const int src_t = t + dt - 1;
                if (!layout.valid(b, src_t)) continue;
                for (int df = 0; df < 3; ++df) {
                  const int src_f = 2 * fo + df - pad_left;
                  if (src_f < 0 || src_f >= freq_in) continue;
                  gx.block(b * steps + src_t, src_f * c_in, 1, c_in) +=
                      dcols.block(row, (dt * 3 + df) * c_in, 1, c_in);
                }
              }
            }
          }
        }
      }
    });
  }
  return o;
}

Var batch_norm(Graph& g, Var x, Var gamma, Var beta, const SeqLayout& layout, int channels,
               bool training, Matrix& running_mean, Matrix& running_var, float momentum, float eps) {
  const Matrix& xv = g.value(x);
  if (xv.cols() % channels != 0) throw DataError("batch_norm: width is not a multiple of channels");
  const auto positions = static_cast<int>(xv.cols() / channels);
  const Matrix mask = layout.mask();
  const double count = static_cast<double>(layout.valid_rows()) * positions;

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(channels), var = Eigen::VectorXd::Zero(channels);
  if (training) {
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
      if (mask(r, 0) == 0.0f) continue;
      for (int p = 0; p < positions; ++p)
        for (int c = 0; c < channels; ++c) mean(c) += xv(r, p * channels + c);
    }
    mean /= count;
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
      if (mask(r, 0) == 0.0f) continue;
      for (int p = 0; p < positions; ++p) {
        for (int c = 0; c < channels; ++c) {
          const double d = xv(r, p * channels + c) - mean(c);
          var(c) += d * d;
        }
      }
    }
    var /= count;
    const double unbias = count > 1 ? count / (count - 1) : 1.0;
    for (int c = 0; c < channels; ++c) {
      running_mean(0, c) = (1 - momentum) * running_mean(0, c) + momentum * static_cast<float>(mean(c));
      running_var(0, c) = (1 - momentum) * running_var(0, c) + momentum * static_cast<float>(var(c) * unbias);
    }
  } else {
    for (int c = 0; c < channels; ++c) {
      mean(c) = running_mean(0, c);
      var(c) = running_var(0, c);
    }
  }
  RowVector inv_std(channels);
  for (int c = 0; c < channels; ++c) inv_std(c) = static_cast<float>(1.0 / std::sqrt(var(c) + eps));

  Matrix xhat(xv.rows(), xv.cols());
  Matrix out(xv.rows(), xv.cols());
  const Matrix& gv = g.value(gamma);
  const Matrix& bv = g.value(beta);
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    for (int p = 0; p < positions; ++p) {
      for (int c = 0; c < channels; ++c) {
        const Eigen::Index k = p * channels + c;
        xhat(r, k) = static_cast<float>((xv(r, k) - mean(c)) * inv_std(c));
        out(r, k) = gv(0, c) * xhat(r, k) + bv(0, c);
      }
    }
  }
  const bool ng = any_grad(g, {x, gamma, beta});
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, x, gamma, beta, o, mask, positions, channels, count, training,
                       xhat = std::move(xhat), inv_std] {
      const Matrix& go = g.grad(o);
      const Matrix& gv = g.value(gamma);
      Eigen::VectorXd sum_dy = Eigen::VectorXd::Zero(channels), sum_dy_xhat = Eigen::VectorXd::Zero(channels);
      for (Eigen::Index r = 0; r < go.rows(); ++r) {
        if (mask(r, 0) == 0.0f) continue;
        for (int p = 0; p < positions; ++p) {
          for (int c = 0; c < channels; ++c) {
            const Eigen::Index k = p * channels + c;
            sum_dy(c) += go(r, k);
            sum_dy_xhat(c) += go(r, k) * xhat(r, k);
          }
        }
      }
      if (g.needs_grad(gamma)) {
        for (int c = 0; c < channels; ++c) g.grad(gamma)(0, c) += static_cast<float>(sum_dy_xhat(c));
      }
      if (g.needs_grad(beta)) {
        for (int c = 0; c < channels; ++c) g.grad(beta)(0, c) += static_cast<float>(sum_dy(c));
      }
      if (g.needs_grad(x)) {
        Matrix& gx = g.grad(x);
        for (Eigen::Index r = 0; r < go.rows(); ++r) {
          const bool real = mask(r, 0) != 0.0f;
          for (int p = 0; p < positions; ++p) {
            for (int c = 0; c < channels; ++c) {
              const Eigen::Index k = p * channels + c;
              double d = go(r, k);
              if (training && real) d -= (sum_dy(c) + xhat(r, k) * sum_dy_xhat(c)) / count;
              gx(r, k) += static_cast<float>(gv(0, c) * inv_std(c) * d);
            }
          }
        }
      }
    });
  }
  return o;
}

Var gru(Graph& g, Var x_proj, Var w_h, Var b_h, const SeqLayout& layout, bool reverse) {
  const Matrix& xp = g.value(x_proj);
  const Matrix& wh = g.value(w_h);
  const auto hidden = static_cast<int>(wh.rows());
  if (wh.cols() != 3 * hidden || xp.cols() != 3 * hidden) throw DataError("gru: projection width must be 3H");
  if (xp.rows() != layout.rows()) throw DataError("gru: input rows do not match the layout");
  const int batch = layout.batch, steps = layout.steps;
  const RowVector bh = g.value(b_h).row(0);

  struct StepCache {
    Matrix h_prev, r, z, n, hn;
  };
  std::vector<StepCache> cache(g.recording() ? steps : 0);
  Matrix out = Matrix::Zero(layout.rows(), hidden);
  Matrix h = Matrix::Zero(batch, hidden);
  Matrix hw(batch, 3 * hidden);
  for (int s = 0; s < steps; ++s) {
    const int t = reverse ? steps - 1 - s : s;
    hw.noalias() = h * wh;
    hw.rowwise() += bh;
    Matrix r(batch, hidden), z(batch, hidden), n(batch, hidden), h_new = Matrix::Zero(batch, hidden);
    for (int b = 0; b < batch; ++b) {
      if (!layout.valid(b, t)) {
        r.row(b).setZero();
        z.row(b).setZero();
        n.row(b).setZero();
        continue;
      }
      const auto x = xp.row(b * steps + t);
      r.row(b) = (1.0f + (-(x.segment(0, hidden) + hw.row(b).segment(0, hidden))).array().exp()).inverse().matrix();
      z.row(b) = (1.0f + (-(x.segment(hidden, hidden) + hw.row(b).segment(hidden, hidden))).array().exp())
                     .inverse()
                     .matrix();
      n.row(b) = (x.segment(2 * hidden, hidden).array() +
                  r.row(b).array() * hw.row(b).segment(2 * hidden, hidden).array())
                     .tanh()
                     .matrix();
      h_new.row(b) = ((1.0f - z.row(b).array()) * n.row(b).array() + z.row(b).array() * h.row(b).array()).matrix();
      out.row(b * steps + t) = h_new.row(b);
    }
    if (g.recording()) cache[s] = {h, std::move(r), std::move(z), std::move(n), hw.rightCols(hidden)};
    h = std::move(h_new);
  }

  const bool ng = any_grad(g, {x_proj, w_h, b_h});
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, x_proj, w_h, b_h, o, layout, reverse, hidden, cache = std::move(cache)] {
      const Matrix& go = g.grad(o);
      const Matrix& wh = g.value(w_h);
      const int batch = layout.batch, steps = layout.steps;
      Matrix dh_next = Matrix::Zero(batch, hidden);
      Matrix dgates(batch, 3 * hidden);
      Matrix dx(batch, 3 * hidden);
      Matrix dwh = Matrix::Zero(hidden, 3 * hidden);
      RowVector dbh = RowVector::Zero(3 * hidden);
      const bool need_x = g.needs_grad(x_proj);
      for (int s = steps - 1; s >= 0; --s) {
        const int t = reverse ? steps - 1 - s : s;
        const StepCache& c = cache[s];
        dgates.setZero();
        dx.setZero();
        Matrix dh_direct = Matrix::Zero(batch, hidden);
        for (int b = 0; b < batch; ++b) {
          if (!layout.valid(b, t)) continue;
          const Eigen::Array<float, 1, Eigen::Dynamic> dh = (go.row(b * steps + t) + dh_next.row(b)).array();
          const auto r = c.r.row(b).array();
          const auto z = c.z.row(b).array();
          const auto n = c.n.row(b).array();
          const auto hp = c.h_prev.row(b).array();
          const Eigen::Array<float, 1, Eigen::Dynamic> dn_pre = dh * (1.0f - z) * (1.0f - n * n);
          const Eigen::Array<float, 1, Eigen::Dynamic> dz_pre = dh * (hp - n) * z * (1.0f - z);
          const Eigen::Array<float, 1, Eigen::Dynamic> dr_pre = dn_pre * c.hn.row(b).array() * r * (1.0f - r);
          dgates.row(b).segment(0, hidden) = dr_pre.matrix();
          dgates.row(b).segment(hidden, hidden) = dz_pre.matrix();
          dgates.row(b).segment(2 * hidden, hidden) = (dn_pre * r).matrix();
          dx.row(b).segment(0, hidden) = dr_pre.matrix();
          dx.row(b).segment(hidden, hidden) = dz_pre.matrix();
          dx.row(b).segment(2 * hidden, hidden) = dn_pre.matrix();
          dh_direct.row(b) = (dh * z).matrix();
        }
        if (need_x) {
          Matrix& gx = g.grad(x_proj);
          for (int b = 0; b < batch; ++b) {
            if (layout.valid(b, t)) gx.row(b * steps + t) += dx.row(b);
          }
        }
        dwh.noalias() += c.h_prev.transpose() * dgates;
        dbh += dgates.colwise().sum();
        dh_next = dh_direct;
        dh_next.noalias() += dgates * wh.transpose();
      }
      if (g.needs_grad(w_h)) g.grad(w_h) += dwh;
      if (g.needs_grad(b_h)) g.grad(b_h) += dbh;
    });
  }
  return o;
}

Var masked_l1_loss(Graph& g, Var pred, const Matrix& target, const SeqLayout& layout) {
  const Matrix& pv = g.value(pred);
  check_same_shape(pv, target, "masked_l1_loss");
  if (pv.rows() != layout.rows()) throw DataError("masked_l1_loss: rows do not match the layout");
  const Matrix mask = layout.mask();
  const double n = static_cast<double>(layout.valid_rows()) * pv.cols();
  if (n <= 0) throw DataError("masked_l1_loss: no valid frames");
  double total = 0.0;
  for (Eigen::Index r = 0; r < pv.rows(); ++r) {
    if (mask(r, 0) != 0.0f) total += (pv.row(r) - target.row(r)).cwiseAbs().cast<double>().sum();
  }
  Matrix out(1, 1);
  out(0, 0) = static_cast<float>(total / n);
  const bool ng = any_grad(g, {pred});
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, pred, o, target, mask, n] {
      const float scale = g.grad(o)(0, 0) / static_cast<float>(n);
      const Matrix& pv = g.value(pred);
      Matrix& gp = g.grad(pred);
      for (Eigen::Index r = 0; r < pv.rows(); ++r) {
        if (mask(r, 0) == 0.0f) continue;
        for (Eigen::Index c = 0; c < pv.cols(); ++c) {
          const float d = pv(r, c) - target(r, c);
          gp(r, c) += d > 0.0f ? scale : (d < 0.0f ? -scale : 0.0f);
        }
      }
    });
  }
  return o;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const float m = logits.row(r).maxCoeff();
    const Eigen::Array<double, 1, Eigen::Dynamic> e = (logits.row(r).array() - m).cast<double>().exp();
    out.row(r) = (e / e.sum()).cast<float>().matrix();
  }
  return out;
}

Var softmax_cross_entropy(Graph& g, Var logits, const std::vector<int>& labels) {
  const Matrix& lv = g.value(logits);
  if (static_cast<Eigen::Index>(labels.size()) != lv.rows()) {
    throw DataError("softmax_cross_entropy: label count does not match rows");
  }
  Matrix probs = softmax_rows(lv);
  double total = 0.0;
  for (Eigen::Index r = 0; r < lv.rows(); ++r) {
    const int y = labels[static_cast<size_t>(r)];
    if (y < 0 || y >= lv.cols()) throw DataError("softmax_cross_entropy: label out of range");
    total -= std::log(std::max(static_cast<double>(probs(r, y)), 1e-30));
  }
  Matrix out(1, 1);
  out(0, 0) = static_cast<float>(total / static_cast<double>(lv.rows()));
  const bool ng = any_grad(g, {logits});
  Var o = g.add_node(std::move(out), ng);
  if (ng) {
    g.set_backward(o, [&g, logits, o, labels, probs = std::move(probs)] {
      const float scale = g.grad(o)(0, 0) / static_cast<float>(probs.rows());
      Matrix d = probs;
      for (Eigen::Index r = 0; r < d.rows(); ++r) d(r, labels[static_cast<size_t>(r)]) -= 1.0f;
      g.grad(logits) += scale * d;
    });
  }
  return o;
}

}  // namespace pvc::nn
