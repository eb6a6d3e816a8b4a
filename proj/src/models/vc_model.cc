#include "pvc/models/vc_model.h"

#include <algorithm>

#include "pvc/corpus/checkpoint.h"

namespace pvc {

nlohmann::json VcConfig::to_json() const {
  return {{"mode", std::string(mode_name(mode))},
          {"d_p", d_p},
          {"d_e", d_e},
          {"d_in", d_in()},
          {"mel_dim", mel_dim},
          {"ref_batch_norm", ref_batch_norm},
          {"bank_k", bank_k},
          {"bank_filters", bank_filters},
          {"highway_layers", highway_layers},
          {"highway_units", highway_units},
          {"gru_units", gru_units},
          {"output_dim", output_dim}};
}

VcConfig VcConfig::from_json(const nlohmann::json& j) {
  VcConfig c;
  try {
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.d_p = j.at("d_p").get<int>();
    c.d_e = j.at("d_e").get<int>();
    c.mel_dim = j.at("mel_dim").get<int>();
    c.ref_batch_norm = j.at("ref_batch_norm").get<bool>();
    c.bank_k = j.at("bank_k").get<int>();
    c.bank_filters = j.at("bank_filters").get<int>();
    c.highway_layers = j.at("highway_layers").get<int>();
    c.highway_units = j.at("highway_units").get<int>();
    c.gru_units = j.at("gru_units").get<int>();
    c.output_dim = j.at("output_dim").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigMismatchError(std::string("model config: ") + e.what());
  } catch (const UsageError& e) {
    throw ConfigMismatchError(std::string("model config: ") + e.what());
  }
  if (j.contains("d_in") && j.at("d_in").get<int>() != c.d_in()) {
    throw ConfigMismatchError("model config: recorded d_in " + std::to_string(j.at("d_in").get<int>()) +
                              " does not match mode/d_p/d_e (" + std::to_string(c.d_in()) + ")");
  }
  return c;
}

VcBatch make_batch(const std::vector<const VcExample*>& examples) {
  if (examples.empty()) throw DataError("make_batch: no examples");
  std::vector<int> lengths;
  for (const VcExample* e : examples) {
    if (e->frames() == 0) throw DataError("make_batch: example " + e->id + " has no frames");
    if (e->mel.rows() != e->frames() || e->target.rows() != e->frames()) {
      throw DataError("make_batch: example " + e->id + " has inconsistent frame counts");
    }
    lengths.push_back(e->frames());
  }
  VcBatch b;
  b.layout = nn::SeqLayout::from_lengths(lengths);
  const int steps = b.layout.steps;
  const Eigen::Index rows = b.layout.rows();
  b.base = Matrix::Zero(rows, examples[0]->base.cols());
  b.mel = Matrix::Zero(rows, examples[0]->mel.cols());
  b.target = Matrix::Zero(rows, examples[0]->target.cols());
  for (size_t i = 0; i < examples.size(); ++i) {
    const VcExample& e = *examples[i];
    if (e.base.cols() != b.base.cols() || e.mel.cols() != b.mel.cols() || e.target.cols() != b.target.cols()) {
      throw DataError("make_batch: example " + e.id + " has mismatched feature widths");
    }
    const auto at = static_cast<Eigen::Index>(i) * steps;
    b.base.middleRows(at, e.frames()) = e.base;
    b.mel.middleRows(at, e.frames()) = e.mel;
    b.target.middleRows(at, e.frames()) = e.target;
  }
  return b;
}

VcModel::VcModel(const VcConfig& config, uint64_t seed) : config_(config) {
  if (config.d_p < 1 || config.d_e < 1 || config.mel_dim < 1 || config.output_dim < 1) {
    throw UsageError("invalid model dimensions");
  }
  Rng rng(seed);
  if (config.mode == InputMode::kProposed) {
    RefEncoderConfig rc;
    rc.mel_dim = config.mel_dim;
    rc.units = config.d_e;
    rc.batch_norm = config.ref_batch_norm;
    Rng ref_rng = rng.fork(1);
    ref_.emplace(rc, params_, ref_rng);
  }
  CbhgConfig cc;
  cc.input_dim = config.d_in();
  cc.bank_k = config.bank_k;
  cc.bank_filters = config.bank_filters;
  cc.highway_layers = config.highway_layers;
  cc.highway_units = config.highway_units;
  cc.gru_units = config.gru_units;
  cc.output_dim = config.output_dim;
  Rng cbhg_rng = rng.fork(2);
  cbhg_.emplace(cc, params_, cbhg_rng);
  params_.add_buffer("mel_mean", Matrix::Zero(1, config.mel_dim));
  params_.add_buffer("mel_std", Matrix::Ones(1, config.mel_dim));
  params_.add_buffer("target_mean", Matrix::Zero(1, config.output_dim));
  params_.add_buffer("target_std", Matrix::Ones(1, config.output_dim));
}

void VcModel::fit_normalization(const std::vector<VcExample>& examples) {
  auto stats = [](const std::vector<const Matrix*>& ms, Matrix& mean_out, Matrix& std_out) {
    const Eigen::Index dim = mean_out.cols();
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim), sq = sum;
    double n = 0;
    for (const Matrix* m : ms) {
      if (m->cols() != dim) throw DataError("fit_normalization: feature width mismatch");
      const Eigen::MatrixXd d = m->cast<double>();
      sum += d.colwise().sum();
      sq += d.array().square().matrix().colwise().sum();
      n += static_cast<double>(d.rows());
    }
    if (n == 0) throw DataError("fit_normalization: no frames");
    const Eigen::RowVectorXd mean = sum / n;
    const Eigen::RowVectorXd var = (sq / n).array() - mean.array().square();
    mean_out = mean.cast<float>();
    std_out = var.cwiseMax(1e-6).cwiseSqrt().cast<float>();
  };
  std::vector<const Matrix*> mels, targets;
  for (const auto& e : examples) {
    mels.push_back(&e.mel);
    targets.push_back(&e.target);
  }
  stats(mels, params_.buffer("mel_mean"), params_.buffer("mel_std"));
  stats(targets, params_.buffer("target_mean"), params_.buffer("target_std"));
}

Matrix VcModel::standardize_mel(const Matrix& mel) const {
  if (mel.cols() != config_.mel_dim) {
    throw DataError("model expects " + std::to_string(config_.mel_dim) + "-dim mel, got " +
                    std::to_string(mel.cols()));
  }
  const RowVector mean = params_.buffer("mel_mean").row(0);
  const RowVector inv = params_.buffer("mel_std").row(0).cwiseInverse();
  Matrix out(mel.rows(), mel.cols());
  for (Eigen::Index t = 0; t < mel.rows(); ++t) out.row(t) = (mel.row(t) - mean).cwiseProduct(inv);
  return out;
}

Matrix VcModel::standardize_target(const Matrix& target) const {
  if (target.cols() != config_.output_dim) throw DataError("target width mismatch");
  const RowVector mean = params_.buffer("target_mean").row(0);
  const RowVector inv = params_.buffer("target_std").row(0).cwiseInverse();
  Matrix out(target.rows(), target.cols());
  for (Eigen::Index t = 0; t < target.rows(); ++t) out.row(t) = (target.row(t) - mean).cwiseProduct(inv);
  return out;
}

Matrix VcModel::destandardize_target(const Matrix& value) const {
  const RowVector mean = params_.buffer("target_mean").row(0);
  const RowVector sd = params_.buffer("target_std").row(0);
  Matrix out(value.rows(), value.cols());
  for (Eigen::Index t = 0; t < value.rows(); ++t) out.row(t) = value.row(t).cwiseProduct(sd) + mean;
  return out;
}

VcModel::Outputs VcModel::forward(nn::Graph& g, const VcBatch& batch, bool training) {
  const int base_dim = config_.d_p + 2;
  if (batch.base.cols() != base_dim) {
    throw DataError("model expects [ppg | f0 | vuv] of width " + std::to_string(base_dim) + ", got " +
                    std::to_string(batch.base.cols()));
  }
  Outputs out;
  nn::Var input = g.constant(batch.base);
  if (ref_) {
    nn::Var mel = g.constant(standardize_mel(batch.mel));
    out.prosody = ref_->forward(g, params_, mel, batch.layout, training);
    input = nn::concat_cols(g, {input, out.prosody});
  }
  out.prediction = cbhg_->forward(g, params_, input, batch.layout);
  return out;
}

nn::Var VcModel::loss(nn::Graph& g, const VcBatch& batch, bool training) {
  Outputs out = forward(g, batch, training);
  return nn::masked_l1_loss(g, out.prediction, standardize_target(batch.target), batch.layout);
}

Matrix VcModel::reference_encode(const Matrix& mel) const {
  if (!ref_) throw ConfigMismatchError("baseline-mode model has no reference encoder");
  if (mel.rows() == 0) throw DataError("reference_encode: empty mel");
  nn::Graph g(false);
  const nn::SeqLayout layout = nn::SeqLayout::single(static_cast<int>(mel.rows()));
  return g.value(ref_->forward(g, mutable_params(), g.constant(standardize_mel(mel)), layout, false));
}

Matrix VcModel::cbhg_forward(const Matrix& input) const {
  if (input.cols() != config_.d_in()) {
    throw DataError("cbhg_forward: input width " + std::to_string(input.cols()) + " does not match d_in " +
                    std::to_string(config_.d_in()));
  }
  if (input.rows() == 0) throw DataError("cbhg_forward: empty input");
  nn::Graph g(false);
  const nn::SeqLayout layout = nn::SeqLayout::single(static_cast<int>(input.rows()));
  return destandardize_target(g.value(cbhg_->forward(g, mutable_params(), g.constant(input), layout)));
}

Matrix VcModel::predict(const Matrix& base, const Matrix& mel) const {
  if (!ref_) return cbhg_forward(base);
  const Matrix prosody = reference_encode(mel);
  if (prosody.rows() != base.rows()) throw DataError("predict: mel and input frame counts differ");
  Matrix input(base.rows(), base.cols() + prosody.cols());
  input << base, prosody;
  return cbhg_forward(input);
}

void save_vc_checkpoint(const std::filesystem::path& path, const VcModel& model, int64_t step,
                        const nlohmann::json& train_config, bool with_optimizer_state) {
  CheckpointData data;
  data.config = {{"kind", "vc_model"}, {"model", model.config().to_json()}, {"train", train_config}};
  data.step = step;
  data.tensors = model.params().export_tensors(with_optimizer_state);
  save_checkpoint(path, data);
}

LoadedModel load_vc_checkpoint(const std::filesystem::path& path, std::optional<InputMode> expected_mode) {
  CheckpointData data = load_checkpoint(path);
  if (!data.config.is_object() || data.config.value("kind", "") != "vc_model") {
    throw ConfigMismatchError(path.string() + ": not a conversion-model checkpoint");
  }
  const VcConfig config = VcConfig::from_json(data.config.at("model"));
  if (expected_mode && *expected_mode != config.mode) {
    throw ConfigMismatchError(path.string() + ": checkpoint was trained in " + std::string(mode_name(config.mode)) +
                              " mode, " + std::string(mode_name(*expected_mode)) + " was requested");
  }
  LoadedModel out{VcModel(config, 0), data.step, data.config.value("train", nlohmann::json::object())};
  out.model.params().import_tensors(data);
  return out;
}

}  // namespace pvc
