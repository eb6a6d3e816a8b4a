#ifndef PVC_VOCODER_VOCODER_H_
#define PVC_VOCODER_VOCODER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pvc/common.h"
#include "pvc/dsp/frame_spec.h"
#include "pvc/dsp/lpc.h"
#include "pvc/random.h"

namespace pvc {

struct VocoderConfig {
  double vuv_threshold = 0.3;  // minimum pitch correlation for a voiced frame
  double f0_min = 50.0;        // period normalisation, as in the features
  double f0_max = 600.0;       // shortest accepted period is sample_rate / f0_max
  uint64_t noise_seed = 0x5eed;
  // Batch output is scaled so that its peak is `peak`; 0 disables scaling.
  double peak = 0.89;
};

// Synthesis parameters decoded from one 32-dim feature frame.
struct FrameParams {
  std::vector<double> reflection;
  double gain = 0.0;
  double period = 0.0;  // samples, 0 when unvoiced
  double correlation = 0.0;
  bool voiced = false;
};

// Throws DataError on non-finite values or a width other than 32, and
// UnstableLpcError (via bfcc_to_lpc) on an invalid envelope.
FrameParams decode_frame(std::span<const float> frame, const FrameSpec& spec, const VocoderConfig& config);

// Frame-by-frame LPC synthesiser. The excitation mixes a pulse train at the
// frame's pitch period with white noise (weights c and sqrt(1 - c^2) for
// pitch correlation c, noise only when unvoiced) and drives an all-pole
// lattice filter. Reflection coefficients, gain, period and correlation are
// interpolated linearly between consecutive frames, so frame t's values hold
// exactly at sample t * hop.
//
// Samples [(t - 1) * hop, t * hop) are emitted when frame t arrives and the
// last block on finish(), one frame of latency. Output is not peak-normalised.
class StreamSynthesizer {
 public:
  using Sink = std::function<void(std::span<const float>)>;

  StreamSynthesizer(const FrameSpec& spec, const VocoderConfig& config = {});

  // Frames must arrive with consecutive indices starting at 0; anything else
  // throws DataError.
  void push(int64_t frame_index, std::span<const float> frame, const Sink& sink);
  void finish(const Sink& sink);

  int64_t frames_received() const { return next_index_; }

 private:
  void render(const FrameParams& from, const FrameParams& to, const Sink& sink);
  float excitation(double period, double correlation, bool voiced);

  FrameSpec spec_;
  VocoderConfig config_;
  int hop_;
  int64_t next_index_ = 0;
  bool finished_ = false;
  std::optional<FrameParams> prev_;
  Rng noise_;
  std::vector<double> lattice_;  // backward prediction errors b_0..b_{p-1}
  double phase_ = 0.0;           // fraction of the current pitch period
  double pending_pulse_ = 0.0;
  double last_pulse_ = 0.0;
  std::vector<float> block_;
};

// T x 32 features to exactly T * hop samples, peak-normalised to
// config.peak unless it is 0.
Waveform synthesize(const Matrix& features, const FrameSpec& spec, const VocoderConfig& config = {});

struct RtfReport {
  double synth_seconds = 0.0;
  double audio_seconds = 0.0;
  double rtf() const { return audio_seconds > 0 ? synth_seconds / audio_seconds : 0.0; }
};

// Wall-clock streaming synthesis of the features, repeated `repeats` times.
RtfReport benchmark_streaming(const Matrix& features, const FrameSpec& spec, int repeats = 1,
                              const VocoderConfig& config = {});

}  // namespace pvc

#endif  // PVC_VOCODER_VOCODER_H_
