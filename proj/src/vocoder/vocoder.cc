#include "pvc/vocoder/vocoder.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pvc/dsp/acoustic.h"

namespace pvc {
namespace {

// Second tap of the pulse lowpass (1 + kPulseTap z^-1).
constexpr double kPulseTap = 0.2;

}  // namespace

FrameParams decode_frame(std::span<const float> frame, const FrameSpec& spec, const VocoderConfig& config) {
  if (frame.size() != static_cast<size_t>(kAcousticDim)) {
    throw DataError("vocoder expects 32-dim frames, got " + std::to_string(frame.size()));
  }
  for (float v : frame) {
    if (!std::isfinite(v)) throw DataError("vocoder: non-finite feature value");
  }
  const LpcCoefficients lpc = bfcc_to_lpc(frame.first(30), spec);
  FrameParams p;
  p.reflection = lpc.reflection;
  p.gain = lpc.gain;
  p.correlation = std::clamp(static_cast<double>(frame[kCorrelationColumn]), 0.0, 1.0);
  const double period = denormalize_period(frame[kPeriodColumn], spec.sample_rate, config.f0_min);
  p.voiced = p.correlation >= config.vuv_threshold && period > 0.0 && period >= spec.sample_rate / config.f0_max;
  p.period = p.voiced ? period : 0.0;
  return p;
}

StreamSynthesizer::StreamSynthesizer(const FrameSpec& spec, const VocoderConfig& config)
    : spec_(spec), config_(config), hop_(spec.hop_samples()), noise_(config.noise_seed),
      lattice_(kLpcOrder, 0.0) {
  spec_.validate();
  block_.resize(static_cast<size_t>(hop_));
}

void StreamSynthesizer::push(int64_t frame_index, std::span<const float> frame, const Sink& sink) {
  if (finished_) throw DataError("stream synthesizer: push after finish");
  if (frame_index != next_index_) {
    throw DataError("stream synthesizer: frame " + std::to_string(frame_index) + " arrived, expected frame " +
                    std::to_string(next_index_) + " (out-of-order frame)");
  }
  FrameParams p = decode_frame(frame, spec_, config_);
  if (prev_) render(*prev_, p, sink);
  prev_ = std::move(p);
  ++next_index_;
}

void StreamSynthesizer::finish(const Sink& sink) {
  if (finished_) return;
  finished_ = true;
  if (prev_) render(*prev_, *prev_, sink);
}

float StreamSynthesizer::excitation(double period, double correlation, bool voiced) {
  const double noise = noise_.normal();
  double pulse = pending_pulse_;
  pending_pulse_ = 0.0;
  if (voiced) {
    phase_ += 1.0 / period;
    if (phase_ >= 1.0) {
      phase_ -= 1.0;
      // The pulse fell phase_ * period samples before now. The train is
      // delayed by one sample, so it goes to whichever of this sample and
      // the next is nearer.
      const double amp = std::sqrt(period);
      if (phase_ * period >= 0.5) {
        pulse += amp;
      } else {
        pending_pulse_ = amp;
      }
    }
  } else {
    phase_ = 0.0;
  }
  // Two-tap lowpass with unit energy, minus the train's mean so the
  // excitation carries no DC.
  const double norm = 1.0 / std::sqrt(1.0 + kPulseTap * kPulseTap);
  double shaped = (pulse + kPulseTap * last_pulse_) * norm;
  last_pulse_ = pulse;
  if (!voiced) return static_cast<float>(noise);
  shaped -= (1.0 + kPulseTap) * norm / std::sqrt(period);
  return static_cast<float>(correlation * shaped + std::sqrt(1.0 - correlation * correlation) * noise);
}

void StreamSynthesizer::render(const FrameParams& from, const FrameParams& to, const Sink& sink) {
  const int order = static_cast<int>(from.reflection.size());
  std::vector<double> k(order);
  for (int j = 0; j < hop_; ++j) {
    const double w = static_cast<double>(j) / hop_;
    for (int m = 0; m < order; ++m) k[m] = (1.0 - w) * from.reflection[m] + w * to.reflection[m];
    const double gain = (1.0 - w) * from.gain + w * to.gain;
    const double corr = (1.0 - w) * from.correlation + w * to.correlation;
    const bool voiced = from.voiced;
    double period = from.period;
    if (from.voiced && to.voiced) period = (1.0 - w) * from.period + w * to.period;
    const double e = gain * excitation(period, corr, voiced);

    // All-pole lattice for 1 / A(z), A(z) = 1 + sum alpha_j z^-j.
    double f = e;
    for (int m = order; m >= 1; --m) {
      f -= k[m - 1] * lattice_[m - 1];
      if (m < order) lattice_[m] = k[m - 1] * f + lattice_[m - 1];
    }
    lattice_[0] = f;
    block_[static_cast<size_t>(j)] = static_cast<float>(f);
  }
  sink(block_);
}

Waveform synthesize(const Matrix& features, const FrameSpec& spec, const VocoderConfig& config) {
  if (features.cols() != kAcousticDim) {
    throw DataError("synthesize expects T x 32 features, got width " + std::to_string(features.cols()));
  }
  Waveform out;
  out.sample_rate = spec.sample_rate;
  out.samples.reserve(static_cast<size_t>(features.rows()) * static_cast<size_t>(spec.hop_samples()));
  StreamSynthesizer synth(spec, config);
  const auto sink = [&](std::span<const float> block) { out.samples.insert(out.samples.end(), block.begin(), block.end()); };
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    synth.push(t, std::span<const float>(features.row(t).data(), kAcousticDim), sink);
  }
  synth.finish(sink);
  if (config.peak > 0.0) {
    float peak = 0.0f;
    for (float s : out.samples) peak = std::max(peak, std::abs(s));
    if (peak > 0.0f) {
      const auto scale = static_cast<float>(config.peak / peak);
      for (auto& s : out.samples) s *= scale;
    }
  }
  return out;
}

RtfReport benchmark_streaming(const Matrix& features, const FrameSpec& spec, int repeats, const VocoderConfig& config) {
  RtfReport r;
  size_t samples = 0;
  const auto sink = [&](std::span<const float> block) { samples += block.size(); };
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) {
    StreamSynthesizer synth(spec, config);
    for (Eigen::Index t = 0; t < features.rows(); ++t) {
      synth.push(t, std::span<const float>(features.row(t).data(), kAcousticDim), sink);
    }
    synth.finish(sink);
  }
  r.synth_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.audio_seconds = static_cast<double>(samples) / spec.sample_rate;
  return r;
}

}  // namespace pvc
