#include "pvc/ppg/ppg.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pvc/corpus/checkpoint.h"
#include "pvc/corpus/feature_cache.h"
#include "pvc/nn/graph.h"

namespace pvc {

void validate_ppg(const Matrix& ppg, int expected_frames) {
  if (expected_frames >= 0 && ppg.rows() != expected_frames) {
    throw DataError("ppg has " + std::to_string(ppg.rows()) + " frames, expected " +
                    std::to_string(expected_frames));
  }
  if (ppg.rows() == 0 || ppg.cols() == 0) throw DataError("ppg is empty");
  for (Eigen::Index t = 0; t < ppg.rows(); ++t) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < ppg.cols(); ++k) {
      const float v = ppg(t, k);
      if (!std::isfinite(v) || v < 0.0f) {
        throw DataError("ppg row " + std::to_string(t) + " has a negative or non-finite entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw DataError("ppg row " + std::to_string(t) + " sums to " + std::to_string(sum) +
                      " (simplex violation)");
    }
  }
}

Matrix load_external_ppg(const std::filesystem::path& path, int expected_frames) {
  FeatureFile f = read_feature_file(path);
  if (f.record.kind != FeatureKind::kPpg) {
    throw DataError(path.string() + ": expected a ppg record, found " +
                    std::string(kind_name(f.record.kind)));
  }
  try {
    validate_ppg(f.record.data, expected_frames);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return std::move(f.record.data);
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open label file");
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    int v;
    std::string rest;
    if (!(ss >> v) || (ss >> rest) || v < 0) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected one non-negative integer");
    }
    labels.push_back(v);
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot write label file");
  for (int v : labels) out << v << '\n';
}

PpgClassifier::PpgClassifier(const ClassifierConfig& config, uint64_t seed) : config_(config) {
  if (config.d_p < 2 || config.hidden < 1 || config.context < 0 || config.mel_dim < 1) {
    throw UsageError("invalid ppg classifier configuration");
  }
  Rng rng(seed);
  const int in = config.input_dim();
  params_.add_weight("w1", in, config.hidden, in, rng);
  params_.add_weight("b1", 1, config.hidden, in, rng);
  params_.add_weight("w2", config.hidden, config.hidden, config.hidden, rng);
  params_.add_weight("b2", 1, config.hidden, config.hidden, rng);
  params_.add_weight("w3", config.hidden, config.d_p, config.hidden, rng);
  params_.add_weight("b3", 1, config.d_p, config.hidden, rng);
  params_.add_buffer("mel_mean", Matrix::Zero(1, config.mel_dim));
  params_.add_buffer("mel_std", Matrix::Ones(1, config.mel_dim));
}

void PpgClassifier::set_normalization(const RowVector& mean, const RowVector& stddev) {
  params_.buffer("mel_mean") = mean;
  params_.buffer("mel_std") = stddev;
}

void PpgClassifier::fit_normalization(const std::vector<const Matrix*>& mels) {
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(config_.mel_dim), sq = sum;
  double total = 0.0;
  for (const Matrix* mel : mels) {
    if (mel->cols() != config_.mel_dim) throw DataError("fit_normalization: mel width mismatch");
    const Eigen::MatrixXd m = mel->cast<double>();
    sum += m.colwise().sum();
    sq += m.array().square().matrix().colwise().sum();
    total += static_cast<double>(m.rows());
  }
  if (total == 0.0) throw DataError("fit_normalization: no frames");
  const Eigen::RowVectorXd mean = sum / total;
  const Eigen::RowVectorXd var = (sq / total).array() - mean.array().square();
  set_normalization(mean.cast<float>(), var.cwiseMax(1e-6).cwiseSqrt().cast<float>());
}

Matrix PpgClassifier::network_input(const Matrix& mel) const {
  if (mel.cols() != config_.mel_dim) {
    throw DataError("ppg classifier expects " + std::to_string(config_.mel_dim) + "-dim mel, got " +
                    std::to_string(mel.cols()));
  }
  const auto frames = static_cast<int>(mel.rows());
  const RowVector mean = params_.buffer("mel_mean").row(0);
  const RowVector inv_std = params_.buffer("mel_std").row(0).cwiseInverse();
  Matrix norm = mel;
  for (int t = 0; t < frames; ++t) norm.row(t) = (norm.row(t) - mean).cwiseProduct(inv_std);
  const int c = config_.context, d = config_.mel_dim;
  Matrix x(frames, config_.input_dim());
  for (int t = 0; t < frames; ++t) {
    for (int j = -c; j <= c; ++j) {
      const int src = std::clamp(t + j, 0, frames - 1);
      x.block(t, (j + c) * d, 1, d) = norm.row(src);
    }
  }
  return x;
}

namespace {

nn::Var classifier_logits(nn::Graph& g, nn::ParameterSet& p, const Matrix& input) {
  using namespace nn;
  Var x = g.constant(input);
  Var h1 = relu(g, add_row(g, matmul(g, x, g.param(p.get("w1"))), g.param(p.get("b1"))));
  Var h2 = relu(g, add_row(g, matmul(g, h1, g.param(p.get("w2"))), g.param(p.get("b2"))));
  return add_row(g, matmul(g, h2, g.param(p.get("w3"))), g.param(p.get("b3")));
}

}  // namespace

Matrix PpgClassifier::logits(const Matrix& mel) const {
  const Matrix x = network_input(mel);
  const Matrix& w1 = params_.get("w1").value;
  const Matrix& w2 = params_.get("w2").value;
  const Matrix& w3 = params_.get("w3").value;
  const Matrix& b1 = params_.get("b1").value;
  const Matrix& b2 = params_.get("b2").value;
  const Matrix& b3 = params_.get("b3").value;
  Matrix out(x.rows(), config_.d_p);
  RowVector h1(config_.hidden), h2(config_.hidden), o(config_.d_p);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    h1.noalias() = x.row(t) * w1;
    h1 = (h1 + b1).cwiseMax(0.0f);
    h2.noalias() = h1 * w2;
    h2 = (h2 + b2).cwiseMax(0.0f);
    o.noalias() = h2 * w3;
    out.row(t) = o + b3;
  }
  return out;
}

Matrix PpgClassifier::posteriors(const Matrix& mel) const { return nn::softmax_rows(logits(mel)); }

void PpgClassifier::save(const std::filesystem::path& path) const {
  CheckpointData data;
  data.config = {{"kind", "ppg_classifier"},
                 {"mel_dim", config_.mel_dim},
                 {"d_p", config_.d_p},
                 {"context", config_.context},
                 {"hidden", config_.hidden}};
  data.tensors = params_.export_tensors(false);
  save_checkpoint(path, data);
}

PpgClassifier PpgClassifier::load(const std::filesystem::path& path) {
  CheckpointData data = load_checkpoint(path);
  if (data.config.value("kind", "") != "ppg_classifier") {
    throw ConfigMismatchError(path.string() + ": not a ppg classifier checkpoint");
  }
  ClassifierConfig cfg;
  cfg.mel_dim = data.config.at("mel_dim").get<int>();
  cfg.d_p = data.config.at("d_p").get<int>();
  cfg.context = data.config.at("context").get<int>();
  cfg.hidden = data.config.at("hidden").get<int>();
  PpgClassifier c(cfg, 0);
  c.params_.import_tensors(data);
  return c;
}

ClassifierTrainResult train_toy_classifier(PpgClassifier& classifier,
                                           const std::vector<LabeledUtterance>& data,
                                           const ClassifierTrainConfig& config) {
  if (data.size() < 2) throw DataError("toy classifier training needs at least 2 labelled utterances");
  const ClassifierConfig& cc = classifier.config();
  size_t total = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const auto& u = data[i];
    if (u.mel.rows() != static_cast<Eigen::Index>(u.labels.size())) {
      throw DataError("utterance " + std::to_string(i) + ": " + std::to_string(u.labels.size()) +
                      " labels for " + std::to_string(u.mel.rows()) + " mel frames");
    }
    if (u.mel.cols() != cc.mel_dim) throw DataError("utterance " + std::to_string(i) + ": mel width mismatch");
    for (int l : u.labels) {
      if (l < 0 || l >= cc.d_p) {
        throw DataError("utterance " + std::to_string(i) + ": label " + std::to_string(l) +
                        " outside [0, " + std::to_string(cc.d_p) + ")");
      }
    }
    total += u.labels.size();
  }

  std::vector<const Matrix*> mels;
  for (const auto& u : data) mels.push_back(&u.mel);
  classifier.fit_normalization(mels);

  std::vector<Matrix> inputs;
  std::vector<std::pair<int, int>> index;
  for (size_t i = 0; i < data.size(); ++i) {
    inputs.push_back(classifier.network_input(data[i].mel));
    for (size_t t = 0; t < data[i].labels.size(); ++t) index.emplace_back(static_cast<int>(i), static_cast<int>(t));
  }

  Rng rng(config.seed);
  nn::ParameterSet& params = classifier.params();
  nn::AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  const int batch = std::min<int>(config.batch_frames, static_cast<int>(index.size()));
  std::vector<size_t> order(index.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  size_t cursor = order.size();

  ClassifierTrainResult result;
  Matrix x(batch, cc.input_dim());
  std::vector<int> y(batch);
  for (int step = 1; step <= config.steps; ++step) {
    for (int b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        for (size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        cursor = 0;
      }
      const auto [u, t] = index[order[cursor++]];
      x.row(b) = inputs[u].row(t);
      y[b] = data[u].labels[t];
    }
    params.zero_grad();
    nn::Graph g(true);
    nn::Var loss = nn::softmax_cross_entropy(g, classifier_logits(g, params, x), y);
    const double l = g.value(loss)(0, 0);
    if (!std::isfinite(l)) throw DataError("ppg classifier: non-finite loss at step " + std::to_string(step));
    g.backward(loss);
    nn::adam_step(params, adam, step);
    result.losses.push_back(l);
  }
  return result;
}

double frame_accuracy(const PpgClassifier& classifier, const LabeledUtterance& utt) {
  const Matrix logits = classifier.logits(utt.mel);
  if (logits.rows() != static_cast<Eigen::Index>(utt.labels.size())) {
    throw DataError("frame_accuracy: label count does not match mel frames");
  }
  int correct = 0;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index arg;
    logits.row(t).maxCoeff(&arg);
    if (arg == utt.labels[t]) ++correct;
  }
  return logits.rows() > 0 ? static_cast<double>(correct) / logits.rows() : 0.0;
}

double mean_row_entropy(const Matrix& ppg) {
  double total = 0.0;
  for (Eigen::Index t = 0; t < ppg.rows(); ++t) {
    for (Eigen::Index k = 0; k < ppg.cols(); ++k) {
      const double p = ppg(t, k);
      if (p > 0.0) total -= p * std::log(p);
    }
  }
  return ppg.rows() > 0 ? total / ppg.rows() : 0.0;
}

Matrix ToyPpgProvider::ppg(const std::string&, const Matrix& mel) const {
  return classifier_->posteriors(mel);
}

Matrix ExternalPpgProvider::ppg(const std::string& utterance_id, const Matrix& mel) const {
  Matrix p = load_external_ppg(dir_ / (utterance_id + ".ppg.feat"), static_cast<int>(mel.rows()));
  if (p.cols() != dim_) {
    throw ConfigMismatchError("external ppg for " + utterance_id + " has " + std::to_string(p.cols()) +
                              " classes, configured d_p is " + std::to_string(dim_));
  }
  return p;
}

}  // namespace pvc
