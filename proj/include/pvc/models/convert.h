#ifndef PVC_MODELS_CONVERT_H_
#define PVC_MODELS_CONVERT_H_

#include <optional>
#include <string>

#include "pvc/dsp/frame_spec.h"
#include "pvc/dsp/pitch.h"
#include "pvc/models/vc_model.h"
#include "pvc/pitchstats/pitch_stats.h"
#include "pvc/ppg/ppg.h"

namespace pvc {

// Everything the models read from one waveform, frame-aligned.
struct UtteranceFeatures {
  Matrix mel;       // T x 80
  PitchTrack pitch;
  Matrix acoustic;  // T x 32
};

UtteranceFeatures extract_features(const Waveform& wave, const FrameSpec& spec);

// Training example for the target speaker: base = [ppg | f0 | vuv].
VcExample make_example(const std::string& id, const UtteranceFeatures& features, const Matrix& ppg);

struct ConversionResult {
  Matrix acoustic;   // T x 32 predicted target features
  Matrix input;      // assembled T x d_in network input
  Matrix prosody;    // T x d_e, empty in baseline mode
  PitchTrack source_pitch;
  PitchTrack converted_pitch;
};

// Source analysis -> prosody from the source mel -> log-f0 mapping from
// source to target statistics -> assemble_input -> cbhg_forward. Throws
// ConfigMismatchError when requested_mode is set and differs from the
// model, or when the PPG provider's dimension differs from the model's d_p.
ConversionResult convert(const Waveform& source, const std::string& utterance_id, const VcModel& model,
                         const PitchStats& source_stats, const PitchStats& target_stats,
                         const PpgProvider& ppg, const FrameSpec& spec,
                         std::optional<InputMode> requested_mode = std::nullopt);

}  // namespace pvc

#endif  // PVC_MODELS_CONVERT_H_
