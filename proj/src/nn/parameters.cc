#include "pvc/nn/parameters.h"

#include <cmath>

namespace pvc::nn {

Parameter& ParameterSet::add_weight(const std::string& name, int rows, int cols, int fan_in,
                                    Rng& rng) {
  Parameter p;
  p.name = name;
  p.value.resize(rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    p.value.data()[i] = static_cast<float>(rng.uniform(-bound, bound));
  }
  p.grad = Matrix::Zero(rows, cols);
  p.m = Matrix::Zero(rows, cols);
  p.v = Matrix::Zero(rows, cols);
  params_.push_back(std::move(p));
  return params_.back();
}

Parameter& ParameterSet::add_constant(const std::string& name, int rows, int cols, float value) {
  Parameter p;
  p.name = name;
  p.value = Matrix::Constant(rows, cols, value);
  p.grad = Matrix::Zero(rows, cols);
  p.m = Matrix::Zero(rows, cols);
  p.v = Matrix::Zero(rows, cols);
  params_.push_back(std::move(p));
  return params_.back();
}

Matrix& ParameterSet::add_buffer(const std::string& name, Matrix value) {
  buffers_.emplace_back(name, std::move(value));
  return buffers_.back().second;
}

Matrix& ParameterSet::buffer(const std::string& name) {
  for (auto& [n, m] : buffers_) {
    if (n == name) return m;
  }
  throw DataError("no buffer named '" + name + "'");
}

const Matrix& ParameterSet::buffer(const std::string& name) const {
  for (const auto& [n, m] : buffers_) {
    if (n == name) return m;
  }
  throw DataError("no buffer named '" + name + "'");
}

Parameter& ParameterSet::get(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw DataError("no parameter named '" + name + "'");
}

const Parameter& ParameterSet::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw DataError("no parameter named '" + name + "'");
}

size_t ParameterSet::num_scalars() const {
  size_t n = 0;
  for (const auto& p : params_) n += static_cast<size_t>(p.value.size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

double ParameterSet::grad_norm() const {
  double sq = 0.0;
  for (const auto& p : params_) sq += p.grad.cast<double>().squaredNorm();
  return std::sqrt(sq);
}

double ParameterSet::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const auto scale = static_cast<float>(max_norm / norm);
    for (auto& p : params_) p.grad *= scale;
  }
  return norm;
}

std::vector<NamedTensor> ParameterSet::export_tensors(bool with_optimizer_state) const {
  std::vector<NamedTensor> out;
  for (const auto& p : params_) out.push_back({"param/" + p.name, p.value});
  if (with_optimizer_state) {
    for (const auto& p : params_) out.push_back({"adam_m/" + p.name, p.m});
    for (const auto& p : params_) out.push_back({"adam_v/" + p.name, p.v});
  }
  for (const auto& [n, m] : buffers_) out.push_back({"buffer/" + n, m});
  return out;
}

void ParameterSet::import_tensors(const CheckpointData& data) {
  auto find = [&](const std::string& name) -> const Matrix* {
    for (const auto& t : data.tensors) {
      if (t.name == name) return &t.value;
    }
    return nullptr;
  };
  auto assign = [](Matrix& dst, const Matrix& src, const std::string& name) {
    if (dst.rows() != src.rows() || dst.cols() != src.cols()) {
      throw ConfigMismatchError("checkpoint tensor '" + name + "' has shape " +
                                std::to_string(src.rows()) + "x" + std::to_string(src.cols()) +
                                ", model expects " + std::to_string(dst.rows()) + "x" +
                                std::to_string(dst.cols()));
    }
    dst = src;
  };
  for (auto& p : params_) {
    const Matrix* v = find("param/" + p.name);
    if (!v) throw ConfigMismatchError("checkpoint is missing parameter '" + p.name + "'");
    assign(p.value, *v, p.name);
    const Matrix* m = find("adam_m/" + p.name);
    const Matrix* s = find("adam_v/" + p.name);
    if (m && s) {
      assign(p.m, *m, p.name);
      assign(p.v, *s, p.name);
    } else {
      p.m.setZero();
      p.v.setZero();
    }
    p.grad.setZero();
  }
  for (auto& [n, buf] : buffers_) {
    const Matrix* b = find("buffer/" + n);
    if (!b) throw ConfigMismatchError("checkpoint is missing buffer '" + n + "'");
    assign(buf, *b, n);
  }
}

void adam_step(ParameterSet& params, const AdamConfig& config, int64_t step) {
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  const auto b1 = static_cast<float>(config.beta1);
  const auto b2 = static_cast<float>(config.beta2);
  const auto lr = static_cast<float>(config.learning_rate / c1);
  const auto inv_c2 = static_cast<float>(1.0 / c2);
  const auto eps = static_cast<float>(config.eps);
  for (auto& p : params.params()) {
    p.m = b1 * p.m + (1.0f - b1) * p.grad;
    p.v = b2 * p.v + (1.0f - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * p.m.array() / ((p.v.array() * inv_c2).sqrt() + eps);
  }
}

}  // namespace pvc::nn
