#include "pvc/dsp/acoustic.h"

#include <algorithm>

#include "pvc/dsp/spectral.h"

namespace pvc {

float normalize_period(double period_samples, int sample_rate, double f0_min) {
  const double max_period = sample_rate / f0_min;
  return static_cast<float>(std::clamp(period_samples / max_period, 0.0, 1.0));
}

double denormalize_period(float value, int sample_rate, double f0_min) {
  return static_cast<double>(value) * (sample_rate / f0_min);
}

Matrix assemble_acoustic(const Matrix& bfcc, const PitchTrack& pitch, const FrameSpec& spec) {
  if (bfcc.cols() != kBarkBands) throw DataError("assemble_acoustic: bfcc must have 30 columns");
  if (bfcc.rows() != pitch.frames()) {
    throw DataError("assemble_acoustic: frame-count mismatch (bfcc " + std::to_string(bfcc.rows()) +
                    ", pitch " + std::to_string(pitch.frames()) + ")");
  }
  Matrix out(bfcc.rows(), kAcousticDim);
  out.leftCols(kBarkBands) = bfcc;
  for (int t = 0; t < pitch.frames(); ++t) {
    out(t, kPeriodColumn) = normalize_period(pitch.period_samples[t], spec.sample_rate);
    out(t, kCorrelationColumn) = pitch.correlation[t];
  }
  return out;
}

Matrix extract_acoustic(const Waveform& wave, const FrameSpec& spec) {
  return assemble_acoustic(bfcc(wave, spec), track_pitch(wave, spec), spec);
}

}  // namespace pvc
