#ifndef PVC_CORPUS_MANIFEST_H_
#define PVC_CORPUS_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pvc {

enum class Split { kTrain, kEval };

struct Utterance {
  std::string id;
  std::string speaker;
  std::filesystem::path audio_path;
  double duration_s = 0.0;
  // Speed-perturbation factor applied at extraction time; 1.0 is the
  // original recording.
  double speed = 1.0;
};

// Text format, one utterance per line:
//
//   id|speaker|path|duration[|speed]
//
// Blank lines and lines starting with '#' are skipped, except a
// "#split=train" / "#split=eval" header. Relative paths resolve against the
// manifest's directory.
struct Manifest {
  std::vector<Utterance> entries;
  Split split = Split::kTrain;

  // Deterministic permutation of entries for a given seed.
  std::vector<Utterance> shuffled(uint64_t seed) const;
};

Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);

// Parses and validates: non-empty, unique ids, positive durations and, when
// check_files is set, every audio file exists.
Manifest load_manifest(const std::filesystem::path& path, bool check_files = true);

void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

void validate_manifest(const Manifest& manifest, bool check_files);

// Ids end up in cache file names.
bool is_valid_utterance_id(const std::string& id);

}  // namespace pvc

#endif  // PVC_CORPUS_MANIFEST_H_
