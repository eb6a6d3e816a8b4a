#ifndef PVC_CLI_COMMANDS_H_
#define PVC_CLI_COMMANDS_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pvc/cli/run_config.h"
#include "pvc/corpus/manifest.h"
#include "pvc/eval/report.h"
#include "pvc/pitchstats/pitch_stats.h"
#include "pvc/ppg/ppg.h"

namespace pvc {

// Synthetic two-speaker corpus: <out>/A.manifest, <out>/B.manifest, wavs and
// frame labels.
void cmd_make_corpus(const std::filesystem::path& out_dir, int utterances_per_speaker, double seconds,
                     uint64_t seed, std::ostream& log);

struct ExtractSummary {
  int computed = 0;
  int skipped = 0;  // every record already valid in the cache
  std::vector<std::string> failures;  // "<id>: <message>"
};

// Expands the manifest with the configured speed factors and caches mel,
// acoustic and f0/vuv records per utterance (plus PPGs when a source is
// available). Entries whose records are all valid are skipped. A failing
// utterance is reported and the rest still processed.
ExtractSummary cmd_extract(const RunConfig& config, const std::filesystem::path& manifest, std::ostream& log);

// Writes one stretched wav per (utterance, factor != 1) and
// <out>/augmented.manifest listing originals and copies.
Manifest cmd_augment(const RunConfig& config, const std::filesystem::path& manifest,
                     const std::filesystem::path& out_dir, std::ostream& log);

// Trains the toy PPG classifier on the original-speed entries of the
// manifests, reading mels from the cache and labels from "<audio>.lab".
void cmd_train_ppg(const RunConfig& config, const std::vector<std::filesystem::path>& manifests,
                   std::ostream& log);

struct TrainSummary {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::filesystem::path checkpoint;
};

// Trains the conversion model on every expanded manifest entry. Writes
// <out>/loss.log, <out>/vc.ckpt and periodic checkpoints under
// <out>/checkpoints.
TrainSummary cmd_train_vc(const RunConfig& config, const std::filesystem::path& manifest,
                          const std::optional<std::filesystem::path>& resume, std::ostream& log);

// Log-f0 statistics over the original-speed entries.
PitchStats cmd_stats(const RunConfig& config, const std::filesystem::path& manifest,
                     const std::filesystem::path& out, std::ostream& log);

struct ConvertRequest {
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path checkpoint;
  std::filesystem::path target_stats;
  // Estimated from the source utterance when empty.
  std::filesystem::path source_stats;
  std::optional<InputMode> mode;
};

// Returns the written waveform, which has the source's sample count.
Waveform cmd_convert(const RunConfig& config, const ConvertRequest& request, std::ostream& log);

EvalReport cmd_eval(const RunConfig& config, const std::filesystem::path& run_dir, bool check,
                    const std::filesystem::path& loss_log, std::ostream& log);

// The configured PPG source. Throws DataError naming a missing classifier
// checkpoint or PPG directory.
std::unique_ptr<PpgProvider> make_ppg_provider(const RunConfig& config);

}  // namespace pvc

#endif  // PVC_CLI_COMMANDS_H_
