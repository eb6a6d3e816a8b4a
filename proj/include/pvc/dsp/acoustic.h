#ifndef PVC_DSP_ACOUSTIC_H_
#define PVC_DSP_ACOUSTIC_H_

#include "pvc/common.h"
#include "pvc/dsp/frame_spec.h"
#include "pvc/dsp/pitch.h"

namespace pvc {

// Column layout of the 32-dim acoustic feature vector.
inline constexpr int kAcousticDim = 32;
inline constexpr int kPeriodColumn = 30;
inline constexpr int kCorrelationColumn = 31;

// period / (sample_rate / f0_min), clipped to [0, 1]. Unvoiced (period 0) maps to 0.
float normalize_period(double period_samples, int sample_rate, double f0_min = 50.0);
double denormalize_period(float value, int sample_rate, double f0_min = 50.0);

// [bfcc | normalised period | correlation], T x 32. Throws DataError on a
// frame-count mismatch or a bfcc width other than 30.
Matrix assemble_acoustic(const Matrix& bfcc, const PitchTrack& pitch, const FrameSpec& spec);

// bfcc + track_pitch + assemble_acoustic.
Matrix extract_acoustic(const Waveform& wave, const FrameSpec& spec);

}  // namespace pvc

#endif  // PVC_DSP_ACOUSTIC_H_
