#ifndef PVC_CORPUS_SYNTHETIC_H_
#define PVC_CORPUS_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvc/common.h"
#include "pvc/corpus/manifest.h"

namespace pvc {

// Label 0 is silence; 1-8 are voiced (formant) classes; 9-11 are fricative
// noise classes.
inline constexpr int kSyntheticPhones = 12;

struct SyntheticSpeaker {
  std::string name;
  double f0_hz = 120.0;        // utterance-average f0
  double f0_spread = 0.08;     // intonation depth, natural-log units
  double formant_scale = 1.0;  // vocal-tract length factor
};

SyntheticSpeaker synthetic_speaker_a();  // low voice
SyntheticSpeaker synthetic_speaker_b();  // high voice, shorter tract

struct SyntheticUtterance {
  std::string id;
  Waveform wave;
  std::vector<int> labels;  // one per analysis frame, label at sample t * hop
};

// Source-filter speech-like signal: a random phone sequence between leading
// and trailing silence, harmonic source with a declining, undulating f0
// contour, and three time-varying formant resonators. Deterministic in
// (speaker, seed).
SyntheticUtterance synthesize_utterance(const SyntheticSpeaker& speaker, const std::string& id,
                                        uint64_t seed, double seconds = 1.5, int sample_rate = 16000,
                                        int hop_samples = 160);

// Writes <dir>/<id>.wav and <dir>/<id>.lab for n utterances of each speaker
// plus <dir>/<speaker>.manifest. Ids are "<speaker>_<nnn>". Returns one
// manifest per speaker.
std::vector<Manifest> write_synthetic_corpus(const std::filesystem::path& dir,
                                             const std::vector<SyntheticSpeaker>& speakers,
                                             int utterances_per_speaker, uint64_t seed,
                                             double seconds = 1.5);

}  // namespace pvc

#endif  // PVC_CORPUS_SYNTHETIC_H_
