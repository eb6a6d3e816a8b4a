#ifndef PVC_DSP_PITCH_H_
#define PVC_DSP_PITCH_H_

#include <vector>

#include "pvc/common.h"
#include "pvc/dsp/frame_spec.h"

namespace pvc {

// Per-frame pitch. vuv[t] == 1 exactly when f0_hz[t] > 0, and then
// period_samples[t] == sample_rate / f0_hz[t]; unvoiced frames carry zeros.
// correlation is the peak normalised autocorrelation clamped to [0, 1] and is
// reported for every frame.
struct PitchTrack {
  std::vector<float> f0_hz;
  std::vector<float> vuv;
  std::vector<float> period_samples;
  std::vector<float> correlation;

  int frames() const { return static_cast<int>(f0_hz.size()); }
  int voiced_frames() const;

  // T x 4 [f0, vuv, period, correlation], the f0vuv cache payload.
  Matrix to_matrix() const;
  static PitchTrack from_matrix(const Matrix& m);

  // Throws DataError when the invariants above do not hold.
  void validate(int sample_rate) const;
};

struct PitchConfig {
  double f0_min = 50.0;
  double f0_max = 600.0;
  double vuv_threshold = 0.3;
  int median_width = 5;
  // Length of the compared segments in the normalised cross-correlation.
  double window_s = 0.020;
};

// Normalised cross-correlation tracker with parabolic peak refinement, a
// correlation threshold for voicing and a median filter over voiced frames.
// Produces spec.num_frames(N) frames.
PitchTrack track_pitch(const Waveform& wave, const FrameSpec& spec,
                       const PitchConfig& config = {});

}  // namespace pvc

#endif  // PVC_DSP_PITCH_H_
