#ifndef PVC_MODELS_FEATURES_H_
#define PVC_MODELS_FEATURES_H_

#include <string>
#include <string_view>

#include "pvc/common.h"
#include "pvc/dsp/pitch.h"

namespace pvc {

enum class InputMode { kBaseline, kProposed };

std::string_view mode_name(InputMode mode);
// Accepts "baseline" and "proposed"; throws UsageError otherwise.
InputMode parse_mode(std::string_view name);

// Baseline: d_p + 2. Proposed: d_p + d_e + 2.
int input_dim(InputMode mode, int d_p, int d_e);

// (log f0 - log 50) / (log 600 - log 50) on voiced frames, 0 otherwise.
float encode_f0(float f0_hz, float vuv);

// [ppg | f0 | vuv] for baseline, [ppg | f0 | vuv | prosody] for proposed.
// prosody must be null in baseline mode and non-null in proposed mode.
// Throws DataError on frame-count mismatches or a missing prosody matrix.
Matrix assemble_input(const Matrix& ppg, const PitchTrack& pitch, const Matrix* prosody, InputMode mode);

}  // namespace pvc

#endif  // PVC_MODELS_FEATURES_H_
