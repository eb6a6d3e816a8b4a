#ifndef PVC_PPG_PPG_H_
#define PVC_PPG_PPG_H_

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pvc/common.h"
#include "pvc/nn/parameters.h"

namespace pvc {

inline constexpr double kSimplexTolerance = 1e-4;
inline constexpr int kToyPpgDim = 40;
inline constexpr int kExternalPpgDim = 512;

// Throws DataError unless every row is non-negative and sums to 1 within
// kSimplexTolerance. expected_frames < 0 skips the frame-count check.
void validate_ppg(const Matrix& ppg, int expected_frames = -1);

// Reads a feature file of kind ppg and validates it.
Matrix load_external_ppg(const std::filesystem::path& path, int expected_frames = -1);

// Frame labels: one integer per line.
std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

struct ClassifierConfig {
  int mel_dim = 80;
  int d_p = kToyPpgDim;
  int context = 5;  // frames on each side
  int hidden = 256;

  int input_dim() const { return (2 * context + 1) * mel_dim; }
};

struct LabeledUtterance {
  Matrix mel;  // T x mel_dim
  std::vector<int> labels;
};

struct ClassifierTrainConfig {
  int steps = 1500;
  int batch_frames = 256;
  double learning_rate = 1e-3;
  uint64_t seed = 1;
};

// Frame-level phone classifier on a window of +/- context mel frames: two
// ReLU layers and a softmax over d_p classes. Inputs are standardised with
// statistics stored alongside the weights.
class PpgClassifier {
 public:
  PpgClassifier(const ClassifierConfig& config, uint64_t seed);

  const ClassifierConfig& config() const { return config_; }
  nn::ParameterSet& params() { return params_; }

  // T x d_p posteriors. Throws DataError when mel has the wrong width.
  Matrix posteriors(const Matrix& mel) const;
  // T x d_p logits. Rows are evaluated independently, so equal context
  // windows give bit-identical rows.
  Matrix logits(const Matrix& mel) const;

  // Context-stacked, standardised input, T x input_dim. Edge frames are
  // repeated past the ends.
  Matrix network_input(const Matrix& mel) const;
  void set_normalization(const RowVector& mean, const RowVector& stddev);
  // Per-dimension mean and standard deviation over all frames.
  void fit_normalization(const std::vector<const Matrix*>& mels);

  void save(const std::filesystem::path& path) const;
  static PpgClassifier load(const std::filesystem::path& path);

 private:
  ClassifierConfig config_;
  nn::ParameterSet params_;
};

struct ClassifierTrainResult {
  std::vector<double> losses;  // one per step
};

// Fits the input normalisation, then cross-entropy training on random frame
// minibatches. Throws DataError with
// fewer than two utterances or when labels and mel frames disagree.
ClassifierTrainResult train_toy_classifier(PpgClassifier& classifier,
                                           const std::vector<LabeledUtterance>& data,
                                           const ClassifierTrainConfig& config);

double frame_accuracy(const PpgClassifier& classifier, const LabeledUtterance& utt);

// Mean natural-log entropy of the rows.
double mean_row_entropy(const Matrix& ppg);

// Source of PPGs for an utterance.
class PpgProvider {
 public:
  virtual ~PpgProvider() = default;
  virtual int dim() const = 0;
  // T x dim posteriors aligned with mel.
  virtual Matrix ppg(const std::string& utterance_id, const Matrix& mel) const = 0;
};

class ToyPpgProvider : public PpgProvider {
 public:
  explicit ToyPpgProvider(std::shared_ptr<const PpgClassifier> classifier)
      : classifier_(std::move(classifier)) {}
  int dim() const override { return classifier_->config().d_p; }
  Matrix ppg(const std::string& utterance_id, const Matrix& mel) const override;

 private:
  std::shared_ptr<const PpgClassifier> classifier_;
};

// Reads "<dir>/<id>.ppg.feat".
class ExternalPpgProvider : public PpgProvider {
 public:
  ExternalPpgProvider(std::filesystem::path dir, int dim) : dir_(std::move(dir)), dim_(dim) {}
  int dim() const override { return dim_; }
  Matrix ppg(const std::string& utterance_id, const Matrix& mel) const override;

 private:
  std::filesystem::path dir_;
  int dim_;
};

}  // namespace pvc

#endif  // PVC_PPG_PPG_H_
