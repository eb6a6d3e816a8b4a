#ifndef PVC_CLI_RUN_CONFIG_H_
#define PVC_CLI_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvc/augment/speed_perturb.h"
#include "pvc/dsp/frame_spec.h"
#include "pvc/eval/report.h"
#include "pvc/models/trainer.h"
#include "pvc/models/vc_model.h"
#include "pvc/ppg/ppg.h"
#include "pvc/vocoder/vocoder.h"

namespace pvc {

enum class PpgSource { kToy, kExternal };

// Every setting a command reads, with defaults. The text form is one
// "key = value" per line; '#' starts a comment. Relative paths are taken
// relative to the working directory.
struct RunConfig {
  FrameSpec frame;
  VcConfig model;
  TrainConfig train;

  PpgSource ppg_source = PpgSource::kToy;
  std::filesystem::path ppg_checkpoint = "out/ppg.ckpt";
  std::filesystem::path ppg_dir;  // <id>.ppg.feat files for the external source
  ClassifierConfig ppg_model;     // d_p and mel_dim follow model.*
  ClassifierTrainConfig ppg_train;

  std::vector<double> speed_factors = kDefaultSpeedFactors;
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path out_dir = "out";
  uint64_t seed = 1;

  VocoderConfig vocoder;
  ReportThresholds thresholds;

  // Throws UsageError naming the key for unknown keys and unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  // "key=value" as given on the command line.
  void apply_override(const std::string& assignment);

  // Throws UsageError with the source name and line number.
  static RunConfig parse(const std::string& text, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  // Every key in keys() order; parse(to_text()) reproduces the config.
  std::string to_text() const;

  // Cross-field checks; throws UsageError.
  void validate() const;

  ClassifierConfig classifier_config() const;
  // Hash of everything that determines cached acoustic features.
  uint64_t extraction_hash() const;
};

// Writes "<dir>/<command>.resolved.cfg" headed by the command line and
// returns its path.
std::filesystem::path write_resolved_config(const RunConfig& config, const std::filesystem::path& dir,
                                            const std::string& command, const std::string& command_line);

}  // namespace pvc

#endif  // PVC_CLI_RUN_CONFIG_H_
