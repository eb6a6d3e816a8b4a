#ifndef PVC_MODELS_TRAINER_H_
#define PVC_MODELS_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <vector>

#include "json.hpp"
#include "pvc/models/vc_model.h"
#include "pvc/nn/parameters.h"

namespace pvc {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int64_t max_steps = 20000;
  double grad_clip_norm = 1.0;
  uint64_t seed = 1;
  int64_t checkpoint_every = 1000;  // 0 disables periodic checkpoints

  // Throws UsageError unless every field is positive.
  void validate() const;
  nlohmann::json to_json() const;
};

struct StepResult {
  int64_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;          // before clipping
  double clipped_grad_norm = 0.0;  // after clipping
};

// Adam on masked L1 reconstruction loss. Batches are whole utterances; the
// batch for a step depends only on (seed, step), so a resumed run follows
// the same sequence as an uninterrupted one.
class Trainer {
 public:
  // Fits the model's normalisation statistics to the examples. Throws
  // DataError for an empty example list.
  Trainer(VcModel& model, std::vector<VcExample> examples, const TrainConfig& config);

  int64_t step() const { return step_; }
  const TrainConfig& config() const { return config_; }

  // One optimisation step. Throws DataError naming the step when the loss is
  // not finite.
  StepResult train_step();

  // Runs until max_steps. Writes "step loss" lines to loss_log when given and
  // checkpoints into checkpoint_dir ("step_<n>.ckpt") every
  // checkpoint_every steps when it is non-empty.
  std::vector<StepResult> run(std::ostream* loss_log = nullptr,
                              const std::filesystem::path& checkpoint_dir = {},
                              const std::function<void(const StepResult&)>& on_step = {});

  // Mean reconstruction loss over all examples, inference mode.
  double evaluate() const;

  void save(const std::filesystem::path& path) const;
  // Restores parameters, optimiser state, normalisation and the step
  // counter. Throws ConfigMismatchError when the checkpoint's model config
  // differs from the trainer's model.
  void resume(const std::filesystem::path& path);

 private:
  std::vector<const VcExample*> batch_for_step(int64_t step);

  VcModel& model_;
  std::vector<VcExample> examples_;
  TrainConfig config_;
  nn::AdamConfig adam_;
  int64_t step_ = 0;
  int64_t cached_epoch_ = -1;
  std::vector<size_t> order_;
};

}  // namespace pvc

#endif  // PVC_MODELS_TRAINER_H_
