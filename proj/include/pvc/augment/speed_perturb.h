#ifndef PVC_AUGMENT_SPEED_PERTURB_H_
#define PVC_AUGMENT_SPEED_PERTURB_H_

#include <span>
#include <string>
#include <vector>

#include "pvc/common.h"
#include "pvc/corpus/manifest.h"

namespace pvc {

inline const std::vector<double> kDefaultSpeedFactors = {0.4, 0.6, 0.8, 1.0, 1.2};

// Waveform-similarity overlap-add.
struct WsolaConfig {
  double frame_s = 0.020;   // analysis frame, 50% overlap
  double search_s = 0.005;  // +/- tolerance around the nominal position
  double min_factor = 0.25;
  double max_factor = 4.0;
};

// Changes duration by 1/factor without changing pitch. The output has
// round(N / factor) samples; factor 1.0 returns the input unchanged. Throws
// UsageError for factors outside [min_factor, max_factor] and DataError for
// inputs shorter than 100 ms.
Waveform time_stretch(const Waveform& wave, double factor, const WsolaConfig& config = {});

// "<id>_sp<factor>", e.g. "utt3_sp0.8".
std::string augmented_id(const std::string& id, double factor);

// One entry per (utterance, factor) in manifest order. Factor 1.0 keeps the
// original entry; the others get a suffixed id, the stretched duration and the
// speed field set. Throws UsageError on duplicate or out-of-range factors.
Manifest expand_manifest(const Manifest& manifest, std::span<const double> factors,
                         const WsolaConfig& config = {});

}  // namespace pvc

#endif  // PVC_AUGMENT_SPEED_PERTURB_H_
