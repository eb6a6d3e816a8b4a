#ifndef PVC_MODELS_REFERENCE_ENCODER_H_
#define PVC_MODELS_REFERENCE_ENCODER_H_

#include <string>
#include <vector>

#include "pvc/nn/graph.h"
#include "pvc/nn/parameters.h"

namespace pvc {

struct RefEncoderConfig {
  int mel_dim = 80;
  std::vector<int> filters = {32, 32, 64, 64, 128, 128};
  int units = 1;  // D_e
  bool batch_norm = false;
};

// Frequency sizes through the conv stack, starting with mel_dim:
// 80 -> 40 -> 20 -> 10 -> 5 -> 3 -> 2 for the default config.
std::vector<int> reference_freq_trace(const RefEncoderConfig& config);

// Stack of 3x3 conv2d layers (stride 1 in time, 2 in frequency, ReLU,
// optional batch normalisation) whose output is flattened over
// (frequency, channel) and fed to a GRU with `units` cells. The GRU state at
// every step is the prosody embedding, T x units in (-1, 1).
class ReferenceEncoder {
 public:
  ReferenceEncoder(const RefEncoderConfig& config, nn::ParameterSet& params, Rng& rng,
                   std::string prefix = "ref");

  const RefEncoderConfig& config() const { return config_; }
  int gru_input_width() const;

  // mel: rows x mel_dim (already standardised).
  nn::Var forward(nn::Graph& g, nn::ParameterSet& params, nn::Var mel, const nn::SeqLayout& layout,
                  bool training) const;

 private:
  RefEncoderConfig config_;
  std::string prefix_;
};

}  // namespace pvc

#endif  // PVC_MODELS_REFERENCE_ENCODER_H_
