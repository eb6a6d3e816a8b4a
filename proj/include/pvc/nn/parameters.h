#ifndef PVC_NN_PARAMETERS_H_
#define PVC_NN_PARAMETERS_H_

#include <deque>
#include <string>
#include <vector>

#include "pvc/common.h"
#include "pvc/corpus/checkpoint.h"
#include "pvc/random.h"

namespace pvc::nn {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  // Adam moments.
  Matrix m;
  Matrix v;
};

// Owns a model's parameters (stable addresses) and non-trained buffers such
// as normalisation statistics.
class ParameterSet {
 public:
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Parameter& add_weight(const std::string& name, int rows, int cols, int fan_in, Rng& rng);
  Parameter& add_constant(const std::string& name, int rows, int cols, float value);

  Matrix& add_buffer(const std::string& name, Matrix value);
  Matrix& buffer(const std::string& name);
  const Matrix& buffer(const std::string& name) const;

  std::deque<Parameter>& params() { return params_; }
  const std::deque<Parameter>& params() const { return params_; }
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;

  size_t num_scalars() const;
  void zero_grad();
  double grad_norm() const;
  // Scales gradients so the global L2 norm is at most max_norm; returns the
  // norm before clipping.
  double clip_grad_norm(double max_norm);

  // Tensors named "param/<name>", "adam_m/<name>", "adam_v/<name>" and
  // "buffer/<name>".
  std::vector<NamedTensor> export_tensors(bool with_optimizer_state) const;
  // Shapes must match; missing optimizer state is zero-filled.
  void import_tensors(const CheckpointData& data);

 private:
  std::deque<Parameter> params_;
  std::deque<std::pair<std::string, Matrix>> buffers_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One Adam update with bias correction; step counts from 1.
void adam_step(ParameterSet& params, const AdamConfig& config, int64_t step);

}  // namespace pvc::nn

#endif  // PVC_NN_PARAMETERS_H_
