#include "pvc/models/trainer.h"

#include <cmath>

#include "pvc/corpus/checkpoint.h"

namespace pvc {

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || batch_size < 1 || max_steps < 1 || !(grad_clip_norm > 0) ||
      checkpoint_every < 0) {
    throw UsageError("training config: learning_rate, batch_size, max_steps and grad_clip_norm must be positive");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate},       {"batch_size", batch_size},
          {"max_steps", max_steps},               {"grad_clip_norm", grad_clip_norm},
          {"seed", seed},                         {"checkpoint_every", checkpoint_every}};
}

Trainer::Trainer(VcModel& model, std::vector<VcExample> examples, const TrainConfig& config)
    : model_(model), examples_(std::move(examples)), config_(config) {
  config_.validate();
  if (examples_.empty()) throw DataError("training set is empty");
  adam_.learning_rate = config.learning_rate;
  model_.fit_normalization(examples_);
}

std::vector<const VcExample*> Trainer::batch_for_step(int64_t step) {
  const auto n = static_cast<int64_t>(examples_.size());
  const int64_t b = std::min<int64_t>(config_.batch_size, n);
  std::vector<const VcExample*> batch;
  for (int64_t i = 0; i < b; ++i) {
    const int64_t global = (step - 1) * b + i;
    const int64_t epoch = global / n;
    if (epoch != cached_epoch_) {
      order_.resize(examples_.size());
      for (size_t j = 0; j < order_.size(); ++j) order_[j] = j;
      Rng rng = Rng(config_.seed).fork(static_cast<uint64_t>(epoch));
      for (size_t j = order_.size() - 1; j > 0; --j) std::swap(order_[j], order_[rng.below(j + 1)]);
      cached_epoch_ = epoch;
    }
    batch.push_back(&examples_[order_[static_cast<size_t>(global % n)]]);
  }
  return batch;
}

StepResult Trainer::train_step() {
  const int64_t next = step_ + 1;
  const VcBatch batch = make_batch(batch_for_step(next));
  nn::ParameterSet& params = model_.params();
  params.zero_grad();
  StepResult r;
  r.step = next;
  {
    nn::Graph g(true);
    nn::Var loss = model_.loss(g, batch, true);
    r.loss = g.value(loss)(0, 0);
    if (!std::isfinite(r.loss)) throw DataError("non-finite loss at step " + std::to_string(next));
    g.backward(loss);
  }
  r.grad_norm = params.clip_grad_norm(config_.grad_clip_norm);
  r.clipped_grad_norm = params.grad_norm();
  nn::adam_step(params, adam_, next);
  step_ = next;
  return r;
}

std::vector<StepResult> Trainer::run(std::ostream* loss_log, const std::filesystem::path& checkpoint_dir,
                                     const std::function<void(const StepResult&)>& on_step) {
  std::vector<StepResult> out;
  if (!checkpoint_dir.empty()) std::filesystem::create_directories(checkpoint_dir);
  while (step_ < config_.max_steps) {
    const StepResult r = train_step();
    out.push_back(r);
    if (loss_log) *loss_log << r.step << ' ' << r.loss << '\n';
    if (on_step) on_step(r);
    if (!checkpoint_dir.empty() && config_.checkpoint_every > 0 && r.step % config_.checkpoint_every == 0) {
      save(checkpoint_dir / ("step_" + std::to_string(r.step) + ".ckpt"));
    }
  }
  if (loss_log) loss_log->flush();
  return out;
}

double Trainer::evaluate() const {
  double total = 0.0, frames = 0.0;
  for (const auto& e : examples_) {
    const Matrix pred = model_.standardize_target(model_.predict(e.base, e.mel));
    const Matrix target = model_.standardize_target(e.target);
    total += (pred - target).cwiseAbs().cast<double>().sum();
    frames += static_cast<double>(e.frames());
  }
  return total / (frames * model_.config().output_dim);
}

void Trainer::save(const std::filesystem::path& path) const {
  save_vc_checkpoint(path, model_, step_, config_.to_json(), true);
}

void Trainer::resume(const std::filesystem::path& path) {
  CheckpointData data = load_checkpoint(path);
  if (!data.config.is_object() || data.config.value("kind", "") != "vc_model") {
    throw ConfigMismatchError(path.string() + ": not a conversion-model checkpoint");
  }
  const nlohmann::json recorded = data.config.at("model");
  const nlohmann::json current = model_.config().to_json();
  if (recorded != current) {
    throw ConfigMismatchError(path.string() + ": checkpoint model config " + recorded.dump() +
                              " differs from " + current.dump());
  }
  model_.params().import_tensors(data);
  step_ = data.step;
}

}  // namespace pvc
