#ifndef PVC_MODELS_VC_MODEL_H_
#define PVC_MODELS_VC_MODEL_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pvc/models/cbhg.h"
#include "pvc/models/features.h"
#include "pvc/models/reference_encoder.h"

namespace pvc {

struct VcConfig {
  InputMode mode = InputMode::kProposed;
  int d_p = 40;
  int d_e = 1;
  int mel_dim = 80;
  bool ref_batch_norm = false;
  int bank_k = 16;
  int bank_filters = 128;
  int highway_layers = 4;
  int highway_units = 64;
  int gru_units = 64;
  int output_dim = 32;

  int d_in() const { return input_dim(mode, d_p, d_e); }
  nlohmann::json to_json() const;
  // Throws ConfigMismatchError on missing fields or a recorded d_in that
  // disagrees with the other fields.
  static VcConfig from_json(const nlohmann::json& j);
};

// One utterance: base = [ppg | f0 | vuv] (T x (d_p + 2)), mel (T x mel_dim)
// and target acoustic features (T x 32), all unnormalised.
struct VcExample {
  std::string id;
  Matrix base;
  Matrix mel;
  Matrix target;

  int frames() const { return static_cast<int>(base.rows()); }
};

// Zero-padded batch of examples, rows b * T + t.
struct VcBatch {
  nn::SeqLayout layout;
  Matrix base;
  Matrix mel;
  Matrix target;
};

VcBatch make_batch(const std::vector<const VcExample*>& examples);

// Reference encoder (proposed mode only) plus CBHG. Mel inputs and acoustic
// targets are standardised with per-dimension statistics held as buffers,
// so predictions leave the model in feature units.
class VcModel {
 public:
  VcModel(const VcConfig& config, uint64_t seed);

  const VcConfig& config() const { return config_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  void fit_normalization(const std::vector<VcExample>& examples);

  struct Outputs {
    nn::Var prediction;  // standardised units
    nn::Var prosody;     // id -1 in baseline mode
  };
  Outputs forward(nn::Graph& g, const VcBatch& batch, bool training);
  // Masked mean L1 between prediction and standardised target.
  nn::Var loss(nn::Graph& g, const VcBatch& batch, bool training);

  // T x d_e prosody embeddings from an unnormalised mel. Throws
  // ConfigMismatchError in baseline mode and DataError for T = 0.
  Matrix reference_encode(const Matrix& mel) const;
  // Assembled input (T x d_in) to T x 32 acoustic features.
  Matrix cbhg_forward(const Matrix& input) const;
  // base -> (prosody from mel) -> cbhg_forward.
  Matrix predict(const Matrix& base, const Matrix& mel) const;

  Matrix standardize_target(const Matrix& target) const;
  Matrix destandardize_target(const Matrix& value) const;

 private:
  Matrix standardize_mel(const Matrix& mel) const;
  // Inference never writes to parameters.
  nn::ParameterSet& mutable_params() const { return const_cast<nn::ParameterSet&>(params_); }

  VcConfig config_;
  nn::ParameterSet params_;
  std::optional<ReferenceEncoder> ref_;
  std::optional<Cbhg> cbhg_;
};

struct LoadedModel {
  VcModel model;
  int64_t step = 0;
  nlohmann::json train_config;
};

// The checkpoint stores {"kind": "vc_model", "model": ..., "train": ...}.
void save_vc_checkpoint(const std::filesystem::path& path, const VcModel& model, int64_t step,
                        const nlohmann::json& train_config, bool with_optimizer_state);
// Throws ConfigMismatchError when expected_mode is set and differs from the
// checkpoint, or when the tensors do not fit the recorded config.
LoadedModel load_vc_checkpoint(const std::filesystem::path& path,
                               std::optional<InputMode> expected_mode = std::nullopt);

}  // namespace pvc

#endif  // PVC_MODELS_VC_MODEL_H_
