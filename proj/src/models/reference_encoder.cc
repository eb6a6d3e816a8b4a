#include "pvc/models/reference_encoder.h"

namespace pvc {

std::vector<int> reference_freq_trace(const RefEncoderConfig& config) {
  std::vector<int> trace = {config.mel_dim};
  for (size_t i = 0; i < config.filters.size(); ++i) trace.push_back(nn::strided_freq_out(trace.back()));
  return trace;
}

ReferenceEncoder::ReferenceEncoder(const RefEncoderConfig& config, nn::ParameterSet& params, Rng& rng,
                                   std::string prefix)
    : config_(config), prefix_(std::move(prefix)) {
  if (config.filters.empty() || config.units < 1 || config.mel_dim < 1) {
    throw UsageError("invalid reference encoder configuration");
  }
  int c_in = 1;
  for (size_t i = 0; i < config.filters.size(); ++i) {
    const std::string n = prefix_ + ".conv" + std::to_string(i);
    const int c_out = config.filters[i];
    params.add_weight(n + ".w", 9 * c_in, c_out, 9 * c_in, rng);
    params.add_weight(n + ".b", 1, c_out, 9 * c_in, rng);
    if (config.batch_norm) {
      params.add_constant(n + ".gamma", 1, c_out, 1.0f);
      params.add_constant(n + ".beta", 1, c_out, 0.0f);
      params.add_buffer(n + ".running_mean", Matrix::Zero(1, c_out));
      params.add_buffer(n + ".running_var", Matrix::Ones(1, c_out));
    }
    c_in = c_out;
  }
  const int width = gru_input_width();
  const int h = config.units;
  params.add_weight(prefix_ + ".gru.wi", width, 3 * h, width, rng);
  params.add_weight(prefix_ + ".gru.bi", 1, 3 * h, h, rng);
  params.add_weight(prefix_ + ".gru.wh", h, 3 * h, h, rng);
  params.add_weight(prefix_ + ".gru.bh", 1, 3 * h, h, rng);
}

int ReferenceEncoder::gru_input_width() const {
  return reference_freq_trace(config_).back() * config_.filters.back();
}

nn::Var ReferenceEncoder::forward(nn::Graph& g, nn::ParameterSet& params, nn::Var mel,
                                  const nn::SeqLayout& layout, bool training) const {
  using namespace nn;
  if (g.value(mel).cols() != config_.mel_dim) {
    throw DataError("reference encoder expects " + std::to_string(config_.mel_dim) + "-dim mel, got " +
                    std::to_string(g.value(mel).cols()));
  }
  if (layout.rows() == 0 || layout.valid_rows() == 0) throw DataError("reference encoder: empty input");
  Var x = mel;
  int freq = config_.mel_dim, c_in = 1;
  for (size_t i = 0; i < config_.filters.size(); ++i) {
    const std::string n = prefix_ + ".conv" + std::to_string(i);
    x = conv2d_time_freq(g, x, g.param(params.get(n + ".w")), g.param(params.get(n + ".b")), layout, freq, c_in);
    freq = strided_freq_out(freq);
    c_in = config_.filters[i];
    if (config_.batch_norm) {
      x = batch_norm(g, x, g.param(params.get(n + ".gamma")), g.param(params.get(n + ".beta")), layout, c_in,
                     training, params.buffer(n + ".running_mean"), params.buffer(n + ".running_var"));
    }
    x = relu(g, x);
  }
  Var proj = add_row(g, matmul(g, x, g.param(params.get(prefix_ + ".gru.wi"))),
                     g.param(params.get(prefix_ + ".gru.bi")));
  return gru(g, proj, g.param(params.get(prefix_ + ".gru.wh")), g.param(params.get(prefix_ + ".gru.bh")), layout,
             false);
}

}  // namespace pvc
