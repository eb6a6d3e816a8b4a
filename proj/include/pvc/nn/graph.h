#ifndef PVC_NN_GRAPH_H_
#define PVC_NN_GRAPH_H_

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "pvc/common.h"
#include "pvc/nn/parameters.h"

namespace pvc::nn {

// A batch of B sequences padded to a common length T. Activation matrices
// hold one row per (sequence, step) at row b * T + t. Steps at or beyond a
// sequence's length are padding: sequence ops treat them as outside the
// sequence, so results on real steps do not depend on how much padding a
// batch carries.
struct SeqLayout {
  int batch = 1;
  int steps = 0;
  std::vector<int> lengths;

  static SeqLayout single(int steps) { return {1, steps, {steps}}; }
  static SeqLayout from_lengths(std::vector<int> lengths);

  int rows() const { return batch * steps; }
  bool valid(int b, int t) const { return t >= 0 && t < lengths[b]; }
  // rows x 1, 1 on real steps and 0 on padding.
  Matrix mask() const;
  int valid_rows() const;
};

struct Var {
  int id = -1;
};

// Reverse-mode automatic differentiation over dense row-major float
// matrices. Nodes are appended in evaluation order and backward() walks
// them in reverse. A graph built with recording == false keeps no
// intermediate state and cannot be differentiated.
class Graph {
 public:
  explicit Graph(bool recording = true) : recording_(recording) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return recording_; }

  Var constant(Matrix value);
  // Leaf bound to a parameter; its gradient accumulates into param.grad.
  Var param(Parameter& param);

  const Matrix& value(Var v) const;

  // Seeds d(loss)/d(loss) = 1 for a 1x1 node and propagates to every
  // parameter reachable from it.
  void backward(Var loss);

  // Used by op implementations.
  Var add_node(Matrix value, bool needs_grad);
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  void set_backward(Var v, std::function<void()> fn);
  // Gradient buffer of v, zero-initialised on first use.
  Matrix& grad(Var v);

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    Parameter* param = nullptr;
    bool needs_grad = false;
    std::function<void()> backward;
  };

  bool recording_;
  std::deque<Node> nodes_;
};

// Elementwise and linear algebra.
Var matmul(Graph& g, Var a, Var b);
Var add(Graph& g, Var a, Var b);
Var sub(Graph& g, Var a, Var b);
Var mul(Graph& g, Var a, Var b);
Var add_row(Graph& g, Var a, Var row);  // broadcasts a 1 x C row over a
Var relu(Graph& g, Var a);
Var sigmoid(Graph& g, Var a);
Var tanh(Graph& g, Var a);
Var concat_cols(Graph& g, const std::vector<Var>& parts);
Var slice_cols(Graph& g, Var a, int start, int count);

// Convolution along time with SAME padding (left (width-1)/2, right
// width/2). x: rows x c_in, weight: (width * c_in) x c_out laid out
// [offset][channel], bias: 1 x c_out.
Var conv1d(Graph& g, Var x, Var weight, Var bias, const SeqLayout& layout, int width);

// out[t] = max(x[t], x[t+1]) within each sequence (width 2, stride 1).
Var max_pool_time2(Graph& g, Var x, const SeqLayout& layout);

// 3x3 convolution over (time, frequency) with stride 1 in time and 2 in
// frequency and TF-style SAME padding, so freq_out = ceil(freq_in / 2).
// x: rows x (freq_in * c_in) laid out [freq][channel]; weight:
// (9 * c_in) x c_out laid out [dt][df][channel]; result
// rows x (freq_out * c_out).
Var conv2d_time_freq(Graph& g, Var x, Var weight, Var bias, const SeqLayout& layout, int freq_in,
                     int c_in);
int strided_freq_out(int freq_in);

// Per-channel batch normalisation over all real (step, position) entries of
// x: rows x (positions * channels). In training mode batch statistics are
// used and the running estimates updated; otherwise the running estimates.
Var batch_norm(Graph& g, Var x, Var gamma, Var beta, const SeqLayout& layout, int channels,
               bool training, Matrix& running_mean, Matrix& running_var, float momentum = 0.1f,
               float eps = 1e-5f);

// GRU over precomputed input projections x_proj = x W_i + b_i, columns
// [reset | update | candidate], rows x 3H. w_h: H x 3H, b_h: 1 x 3H.
//   r = s(x_r + h W_hr + b_hr), z = s(x_z + h W_hz + b_hz)
//   n = tanh(x_n + r * (h W_hn + b_hn)), h' = (1 - z) n + z h
// The state starts at zero at the first real step of each sequence (the
// last one when reverse is set); padding steps output zero.
Var gru(Graph& g, Var x_proj, Var w_h, Var b_h, const SeqLayout& layout, bool reverse);

// Mean |pred - target| over real rows and all columns; 1 x 1.
Var masked_l1_loss(Graph& g, Var pred, const Matrix& target, const SeqLayout& layout);

// Mean cross-entropy of row-wise softmax(logits) against integer labels; 1 x 1.
Var softmax_cross_entropy(Graph& g, Var logits, const std::vector<int>& labels);

// Row-wise softmax, outside any graph.
Matrix softmax_rows(const Matrix& logits);

}  // namespace pvc::nn

#endif  // PVC_NN_GRAPH_H_
