#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "pvc/corpus/synthetic.h"
#include "pvc/dsp/acoustic.h"
#include "pvc/dsp/lpc.h"
#include "pvc/dsp/pitch.h"
#include "pvc/dsp/spectral.h"
#include "pvc/vocoder/vocoder.h"

using namespace pvc;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Matrix flat_noise_features(int frames) {
  return Matrix::Zero(frames, kAcousticDim);
}

// Prediction-error filter 1 + sum alpha_j z^-j from reflection coefficients
// in the same sign convention.
std::vector<double> error_filter_from_reflection(const std::vector<double>& k) {
  std::vector<double> alpha{1.0};
  for (double ki : k) {
    std::vector<double> next(alpha.size() + 1, 0.0);
    for (size_t j = 0; j < alpha.size(); ++j) next[j] += alpha[j];
    for (size_t j = 0; j < alpha.size(); ++j) next[alpha.size() - j] += ki * alpha[j];
    alpha = next;
  }
  return alpha;
}

// Welch power spectrum with a Hann window, by direct DFT.
std::vector<double> welch_psd(const std::vector<float>& x, int n) {
  std::vector<double> psd(static_cast<size_t>(n / 2 + 1), 0.0);
  std::vector<double> win(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) win[i] = 0.5 - 0.5 * std::cos(2 * M_PI * i / n);
  std::vector<std::complex<double>> twiddle(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) twiddle[i] = std::polar(1.0, -2 * M_PI * i / n);
  int segments = 0;
  for (size_t start = 0; start + n <= x.size(); start += static_cast<size_t>(n / 2)) {
    for (int k = 0; k <= n / 2; ++k) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < n; ++i) acc += win[i] * x[start + i] * twiddle[(static_cast<size_t>(k) * i) % n];
      psd[k] += std::norm(acc);
    }
    ++segments;
  }
  for (auto& p : psd) p /= segments;
  return psd;
}

std::vector<float> stream_all(const Matrix& features, const FrameSpec& spec, const VocoderConfig& cfg,
                              std::vector<size_t>* block_sizes = nullptr) {
  std::vector<float> out;
  StreamSynthesizer synth(spec, cfg);
  const auto sink = [&](std::span<const float> block) {
    if (block_sizes) block_sizes->push_back(block.size());
    out.insert(out.end(), block.begin(), block.end());
  };
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    synth.push(t, std::span<const float>(features.row(t).data(), kAcousticDim), sink);
    if (t >= 1) CHECK(out.size() == static_cast<size_t>(t * spec.hop_samples()));
  }
  synth.finish(sink);
  return out;
}

}  // namespace

TEST_CASE("output length is frames times hop") {
  FrameSpec spec;
  const Waveform w = synthesize(flat_noise_features(100), spec);
  CHECK(w.samples.size() == 16000);
  CHECK(w.sample_rate == 16000);
  CHECK(synthesize(flat_noise_features(1), spec).samples.size() == 160);
}

TEST_CASE("lattice filter matches a direct-form all-pole oracle") {
  FrameSpec spec;
  const auto utt = synthesize_utterance(synthetic_speaker_a(), "x", 3, 1.0);
  const Matrix feat = extract_acoustic(utt.wave, spec);
  // A voiced-region envelope held constant, with zero correlation so the
  // excitation is the raw noise sequence.
  Matrix frames(40, kAcousticDim);
  for (int t = 0; t < 40; ++t) frames.row(t) = feat.row(50);
  frames.col(kCorrelationColumn).setZero();
  VocoderConfig cfg;
  cfg.peak = 0.0;
  const Waveform y = synthesize(frames, spec, cfg);

  const LpcCoefficients lpc = bfcc_to_lpc(std::span<const float>(frames.row(0).data(), 30), spec);
  const auto alpha = error_filter_from_reflection(lpc.reflection);
  Rng noise(cfg.noise_seed);
  std::vector<double> ref(y.samples.size(), 0.0);
  for (size_t n = 0; n < ref.size(); ++n) {
    double acc = lpc.gain * noise.normal();
    for (size_t j = 1; j < alpha.size() && j <= n; ++j) acc -= alpha[j] * ref[n - j];
    ref[n] = acc;
  }
  double peak = 0.0, worst = 0.0;
  for (size_t n = 0; n < ref.size(); ++n) {
    peak = std::max(peak, std::abs(ref[n]));
    worst = std::max(worst, std::abs(ref[n] - y.samples[n]));
  }
  CHECK(worst < 1e-5 * peak);
}

TEST_CASE("flat envelope and zero correlation give a flat long-term spectrum") {
  FrameSpec spec;
  VocoderConfig cfg;
  cfg.peak = 0.0;
  const Waveform y = synthesize(flat_noise_features(1000), spec, cfg);
  const int n = spec.fft_size;
  const auto psd = welch_psd(y.samples, n);
  const Matrix fb = bark_filterbank(spec.sample_rate, n, kBarkBands);
  std::vector<double> band_db(kBarkBands);
  double mean_db = 0.0;
  for (int m = 0; m < kBarkBands; ++m) {
    double e = 0.0;
    for (int k = 0; k <= n / 2; ++k) e += fb(m, k) * psd[k];
    band_db[m] = 10.0 * std::log10(e);
    mean_db += band_db[m] / kBarkBands;
  }
  for (int m = 0; m < kBarkBands; ++m) {
    INFO("band " << m);
    CHECK(std::abs(band_db[m] - mean_db) < 3.0);
  }
}

TEST_CASE("voiced frames follow the requested pitch period") {
  FrameSpec spec;
  Matrix frames = flat_noise_features(150);
  const double period = 100.0;  // 160 Hz
  frames.col(kPeriodColumn).setConstant(normalize_period(period, spec.sample_rate));
  frames.col(kCorrelationColumn).setConstant(0.95f);
  const Waveform y = synthesize(frames, spec);
  const PitchTrack track = track_pitch(y, spec);
  std::vector<double> f0;
  for (int t = 10; t < track.frames() - 10; ++t) {
    if (track.vuv[t] > 0) f0.push_back(track.f0_hz[t]);
  }
  REQUIRE(f0.size() > 100);
  CHECK(median(f0) == doctest::Approx(160.0).epsilon(0.02));
}

TEST_CASE("streamed output is bit-identical to batch synthesis") {
  FrameSpec spec;
  const auto utt = synthesize_utterance(synthetic_speaker_b(), "x", 11, 1.2);
  const Matrix feat = extract_acoustic(utt.wave, spec);
  VocoderConfig cfg;
  cfg.peak = 0.0;
  std::vector<size_t> blocks;
  const auto streamed = stream_all(feat, spec, cfg, &blocks);
  const Waveform batch = synthesize(feat, spec, cfg);
  REQUIRE(streamed.size() == batch.samples.size());
  CHECK(std::equal(streamed.begin(), streamed.end(), batch.samples.begin()));
  CHECK(blocks.size() == static_cast<size_t>(feat.rows()));
  for (size_t b : blocks) CHECK(b == static_cast<size_t>(spec.hop_samples()));

  const Waveform normalized = synthesize(feat, spec);
  float peak = 0.0f;
  for (float s : normalized.samples) peak = std::max(peak, std::abs(s));
  CHECK(peak == doctest::Approx(0.89).epsilon(1e-6));
}

TEST_CASE("frames must arrive in order") {
  FrameSpec spec;
  const Matrix frames = flat_noise_features(6);
  StreamSynthesizer synth(spec);
  const auto sink = [](std::span<const float>) {};
  auto row = [&](int t) { return std::span<const float>(frames.row(t).data(), kAcousticDim); };
  for (int t = 0; t < 4; ++t) synth.push(t, row(t), sink);
  CHECK_THROWS_WITH_AS(synth.push(5, row(5), sink), doctest::Contains("out-of-order"), DataError);
  synth.push(4, row(4), sink);
  CHECK_THROWS_AS(synth.push(4, row(4), sink), DataError);
  CHECK(synth.frames_received() == 5);
}

TEST_CASE("invalid features are rejected") {
  FrameSpec spec;
  Matrix frames = flat_noise_features(5);
  frames(2, 7) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(synthesize(frames, spec), DataError);
  frames(2, 7) = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(synthesize(frames, spec), DataError);
  CHECK_THROWS_AS(synthesize(Matrix::Zero(5, 30), spec), DataError);
}

TEST_CASE("finite perturbed features synthesize without overflow") {
  FrameSpec spec;
  const auto utt = synthesize_utterance(synthetic_speaker_a(), "x", 21, 1.0);
  Matrix feat = extract_acoustic(utt.wave, spec);
  Rng rng(4);
  for (Eigen::Index i = 0; i < feat.size(); ++i) feat.data()[i] += static_cast<float>(0.5 * rng.normal());
  const Waveform y = synthesize(feat, spec);
  for (float s : y.samples) {
    REQUIRE(std::isfinite(s));
    CHECK(std::abs(s) <= 1.0f);
  }
}

TEST_CASE("copy synthesis preserves f0 and the Bark envelope") {
  FrameSpec spec;
  std::vector<double> f0_err;
  std::vector<std::vector<double>> band_err(kBarkBands);
  std::vector<double> all_err;
  for (int i = 0; i < 5; ++i) {
    const auto speaker = i % 2 ? synthetic_speaker_b() : synthetic_speaker_a();
    const auto utt = synthesize_utterance(speaker, "copy", 900 + i, 1.5);
    const Matrix feat = extract_acoustic(utt.wave, spec);
    Waveform y = synthesize(feat, spec);
    y.samples.resize(utt.wave.samples.size());

    const PitchTrack p0 = track_pitch(utt.wave, spec), p1 = track_pitch(y, spec);
    for (int t = 0; t < std::min(p0.frames(), p1.frames()); ++t) {
      if (p0.vuv[t] > 0 && p1.vuv[t] > 0) f0_err.push_back(std::abs(p0.f0_hz[t] - p1.f0_hz[t]));
    }

    // Speech frames only; the output is peak-normalised, so the mean level
    // difference is removed before comparing.
    const Matrix b0 = bark_log_energies(utt.wave, spec), b1 = bark_log_energies(y, spec);
    std::vector<int> frames;
    for (int t = 0; t < std::min<int>(b0.rows(), static_cast<int>(utt.labels.size())); ++t) {
      if (utt.labels[t] != 0) frames.push_back(t);
    }
    double offset = 0.0;
    for (int t : frames) offset += (b1.row(t) - b0.row(t)).cast<double>().sum();
    offset /= static_cast<double>(frames.size()) * kBarkBands;
    for (int t : frames) {
      for (int m = 0; m < kBarkBands; ++m) {
        const double db = 10.0 / std::log(10.0) * std::abs(b1(t, m) - b0(t, m) - offset);
        band_err[m].push_back(db);
        all_err.push_back(db);
      }
    }
  }
  CHECK(median(f0_err) < 10.0);
  CHECK(median(all_err) < 3.0);
  // The lowest band sits below the high speaker's f0; see the README.
  for (int m = 1; m < kBarkBands; ++m) {
    INFO("band " << m);
    CHECK(median(band_err[m]) < 3.0);
  }
  WARN(median(band_err[0]) < 3.0);
}

TEST_CASE("streaming benchmark reports real-time factor") {
  FrameSpec spec;
  const auto utt = synthesize_utterance(synthetic_speaker_a(), "x", 1, 2.0);
  const Matrix feat = extract_acoustic(utt.wave, spec);
  const RtfReport r = benchmark_streaming(feat, spec, 2);
  CHECK(r.audio_seconds == doctest::Approx(2.0 * feat.rows() * spec.hop_samples() / spec.sample_rate));
  CHECK(r.synth_seconds > 0.0);
  MESSAGE("real-time factor " << r.rtf());
}
