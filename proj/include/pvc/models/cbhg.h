#ifndef PVC_MODELS_CBHG_H_
#define PVC_MODELS_CBHG_H_

#include <string>

#include "pvc/nn/graph.h"
#include "pvc/nn/parameters.h"

namespace pvc {

struct CbhgConfig {
  int input_dim = 0;
  int bank_k = 16;  // widths 1..bank_k
  int bank_filters = 128;
  int projection_filters = 128;
  int highway_layers = 4;
  int highway_units = 64;
  int gru_units = 64;  // per direction
  int output_dim = 32;
};

// Conv bank (ReLU) -> max pool (width 2, stride 1) -> two width-3 projection
// convs with a residual connection -> linear to highway_units -> highway
// stack -> bidirectional GRU -> linear output. Every stage keeps the
// sequence length.
class Cbhg {
 public:
  Cbhg(const CbhgConfig& config, nn::ParameterSet& params, Rng& rng, std::string prefix = "cbhg");

  const CbhgConfig& config() const { return config_; }

  // x: rows x input_dim; returns rows x output_dim.
  nn::Var forward(nn::Graph& g, nn::ParameterSet& params, nn::Var x, const nn::SeqLayout& layout) const;

 private:
  CbhgConfig config_;
  std::string prefix_;
};

}  // namespace pvc

#endif  // PVC_MODELS_CBHG_H_
