#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../support/signals.h"
#include "pvc/dsp/acoustic.h"
#include "pvc/dsp/lpc.h"
#include "pvc/dsp/pitch.h"
#include "pvc/dsp/spectral.h"

using namespace pvc;
namespace sig = pvc::testing;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Step-up from reflection coefficients, written independently of the library.
std::vector<double> stable_ar_from_reflection(const std::vector<double>& k) {
  std::vector<double> a;  // predictor form
  for (size_t i = 0; i < k.size(); ++i) {
    std::vector<double> next(i + 1);
    for (size_t j = 0; j < i; ++j) next[j] = a[j] - k[i] * a[i - 1 - j];
    next[i] = k[i];
    a = next;
  }
  return a;
}

}  // namespace

TEST_CASE("frame spec") {
  FrameSpec spec;
  CHECK(spec.hop_samples() == 160);
  CHECK(spec.win_samples() == 400);
  CHECK(spec.num_frames(16000) == 101);
  CHECK_NOTHROW(spec.validate());
  FrameSpec bad = spec;
  bad.hop_s = 0.0125;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = spec;
  bad.fft_size = 256;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = spec;
  bad.fft_size = 500;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  CHECK(spec.hash() != bad.hash());
}

TEST_CASE("stft_mel shape, zero input and short input") {
  FrameSpec spec;
  const Matrix mel = stft_mel(sig::white_noise(1.0, 1), spec);
  CHECK(mel.rows() == 16000 / 160 + 1);
  CHECK(mel.cols() == 80);
  CHECK(mel.allFinite());

  const Matrix zero = stft_mel(sig::silence(1.0), spec);
  CHECK((zero.array() == static_cast<float>(std::log(kLogFloor))).all());

  CHECK_THROWS_AS(stft_mel(sig::silence(0.02), spec), DataError);
}

TEST_CASE("stft_mel of a 1 kHz sine peaks at the filter centred nearest 1 kHz") {
  FrameSpec spec;
  const auto centers = mel_center_frequencies(spec.sample_rate, kMelDim);
  int expected = 0;
  for (int m = 1; m < kMelDim; ++m) {
    if (std::abs(centers[m] - 1000.0) < std::abs(centers[expected] - 1000.0)) expected = m;
  }
  const Matrix mel = stft_mel(sig::sine(1000.0, 0.5), spec);
  // frames whose analysis window lies inside the signal; the edge frames see
  // reflection padding, which breaks the sine's phase continuity
  const int half_win = spec.win_samples() / 2;
  for (Eigen::Index t = 0; t < mel.rows(); ++t) {
    if (t * 160 < half_win || t * 160 + half_win > 8000) continue;
    Eigen::Index arg;
    mel.row(t).maxCoeff(&arg);
    CHECK(std::abs(static_cast<int>(arg) - expected) <= 1);
    if ((t - 1) * 160 >= half_win) {
      Eigen::Index prev;
      mel.row(t - 1).maxCoeff(&prev);
      CHECK(arg == prev);
    }
  }
}

TEST_CASE("filterbanks cover every interior bin with increasing centres") {
  for (const Matrix& fb : {mel_filterbank(16000, 512, kMelDim), bark_filterbank(16000, 512, kBarkBands)}) {
    const Eigen::VectorXf col_sum = fb.colwise().sum().transpose();
    for (int k = 1; k < 256; ++k) CHECK(col_sum(k) > 0.0f);
  }
  for (const auto& c : {mel_center_frequencies(16000, kMelDim), bark_center_frequencies(16000, kBarkBands)}) {
    for (size_t i = 1; i < c.size(); ++i) CHECK(c[i] > c[i - 1]);
  }
  const Matrix bark = bark_filterbank(16000, 512, kBarkBands);
  for (int m = 0; m < kBarkBands; ++m) CHECK(bark.row(m).sum() == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(hz_to_bark(bark_to_hz(7.3)) == doctest::Approx(7.3).epsilon(1e-12));
}

TEST_CASE("orthonormal DCT round trip on random vectors") {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(30);
    for (auto& v : x) v = rng.normal() * 10.0;
    const auto back = idct_ortho(dct_ortho(x));
    for (int i = 0; i < 30; ++i) worst = std::max(worst, std::abs(back[i] - x[i]));
  }
  CHECK(worst < 1e-5);
  // orthonormal: energy preserved
  std::vector<double> x(30);
  for (auto& v : x) v = rng.normal();
  const auto c = dct_ortho(x);
  CHECK(std::inner_product(c.begin(), c.end(), c.begin(), 0.0) ==
        doctest::Approx(std::inner_product(x.begin(), x.end(), x.begin(), 0.0)));
}

TEST_CASE("bfcc of silence is the floor constant in c0 only") {
  const Matrix c = bfcc(sig::silence(0.5), FrameSpec{});
  CHECK(c.cols() == 30);
  for (Eigen::Index t = 0; t < c.rows(); ++t) {
    CHECK(c(t, 0) == doctest::Approx(std::sqrt(30.0) * std::log(kLogFloor)).epsilon(1e-6));
    for (int k = 1; k < 30; ++k) CHECK(std::abs(c(t, k)) < 1e-4);
  }
}

TEST_CASE("bfcc of white noise is dominated by c0") {
  const Matrix c = bfcc(sig::white_noise(2.0, 11), FrameSpec{});
  const double c0 = c.col(0).cwiseAbs().mean();
  for (int k = 1; k < 30; ++k) CHECK(c0 > c.col(k).cwiseAbs().mean());
}

TEST_CASE("bfcc inverts to the band log energies") {
  FrameSpec spec;
  const Waveform w = sig::harmonic([](double) { return 140.0; }, 0.5);
  const Matrix bands = bark_log_energies(w, spec);
  const Matrix c = bfcc(w, spec);
  for (Eigen::Index t = 0; t < c.rows(); ++t) {
    std::vector<double> row(c.row(t).data(), c.row(t).data() + 30);
    const auto back = idct_ortho(row);
    for (int m = 0; m < 30; ++m) CHECK(std::abs(back[m] - bands(t, m)) < 1e-4);
  }
}

TEST_CASE("frame counts agree across extractors and extraction is pure") {
  FrameSpec spec;
  for (double seconds : {0.5, 1.0, 1.234, 3.0}) {
    const Waveform w = sig::white_noise(seconds, 2);
    const int expected = spec.num_frames(w.samples.size());
    CHECK(stft_mel(w, spec).rows() == expected);
    CHECK(bfcc(w, spec).rows() == expected);
    CHECK(track_pitch(w, spec).frames() == expected);
  }
  const Waveform w = sig::harmonic([](double t) { return 100 + 50 * t; }, 1.0);
  CHECK(stft_mel(w, spec) == stft_mel(w, spec));
  CHECK(bfcc(w, spec) == bfcc(w, spec));
  CHECK(track_pitch(w, spec).to_matrix() == track_pitch(w, spec).to_matrix());
}

TEST_CASE("track_pitch on a 120 Hz sawtooth") {
  FrameSpec spec;
  const PitchTrack p = track_pitch(sig::sawtooth(120.0, 1.0), spec);
  CHECK_NOTHROW(p.validate(16000));
  std::vector<double> f0;
  for (int t = 3; t < p.frames() - 3; ++t) {
    CHECK(p.vuv[t] == 1.0f);
    if (p.vuv[t] > 0) f0.push_back(p.f0_hz[t]);
  }
  CHECK(median(f0) == doctest::Approx(120.0).epsilon(3.0 / 120.0));
  CHECK(p.period_samples[50] == doctest::Approx(16000.0 / 120.0).epsilon(0.025));
}

TEST_CASE("track_pitch marks white noise and silence unvoiced") {
  FrameSpec spec;
  const PitchTrack noise = track_pitch(sig::white_noise(2.0, 17), spec);
  int unvoiced = noise.frames() - noise.voiced_frames();
  CHECK(unvoiced >= 0.9 * noise.frames());

  const PitchTrack quiet = track_pitch(sig::silence(1.0), spec);
  CHECK(quiet.voiced_frames() == 0);
  for (int t = 0; t < quiet.frames(); ++t) CHECK(quiet.f0_hz[t] == 0.0f);
}

TEST_CASE("track_pitch follows harmonic sweeps without octave errors") {
  FrameSpec spec;
  struct Sweep {
    double lo, hi;
  };
  for (auto s : {Sweep{80, 300}, Sweep{300, 80}, Sweep{100, 200}}) {
    const double dur = 2.0;
    auto f0_at = [&](double t) { return s.lo * std::pow(s.hi / s.lo, t / dur); };
    const PitchTrack p = track_pitch(sig::harmonic(f0_at, dur), spec);
    int voiced = 0, within = 0, octave = 0;
    for (int t = 2; t < p.frames() - 2; ++t) {
      if (p.vuv[t] == 0.0f) continue;
      ++voiced;
      const double truth = f0_at(t * 0.010);
      if (std::abs(p.f0_hz[t] - truth) <= 3.0) ++within;
      const double ratio = p.f0_hz[t] / truth;
      if (ratio > 1.8 || ratio < 0.55) ++octave;
    }
    CHECK(voiced >= 0.9 * (p.frames() - 4));
    CHECK(within >= 0.9 * voiced);
    CHECK(octave <= 0.1 * voiced);
  }
}

TEST_CASE("levinson_durbin closed forms") {
  const std::vector<double> ar1 = {1.0, 0.9, 0.81};
  const LpcCoefficients a = levinson_durbin(ar1, 2);
  CHECK(a.coeffs[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(std::abs(a.coeffs[1]) < 1e-12);
  CHECK(a.residual_error == doctest::Approx(0.19).epsilon(1e-12));
  CHECK(a.gain == doctest::Approx(std::sqrt(0.19)).epsilon(1e-12));

  std::vector<double> white(17, 0.0);
  white[0] = 1.0;
  const LpcCoefficients w = levinson_durbin(white, 16);
  for (double c : w.coeffs) CHECK(c == 0.0);
  CHECK(w.gain == 1.0);

  const std::vector<double> zero = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(levinson_durbin(zero, 2), DataError);
  const std::vector<double> invalid = {1.0, 1.5, 0.2};
  CHECK_THROWS_AS(levinson_durbin(invalid, 2), UnstableLpcError);
}

TEST_CASE("levinson_durbin satisfies the normal equations") {
  Rng rng(21);
  double worst = 0.0, worst_vs_solver = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(2048);
    for (auto& v : x) v = rng.normal();
    // colour the noise so the system is not trivially diagonal
    for (size_t i = x.size() - 1; i >= 2; --i) x[i] += 0.7 * x[i - 1] - 0.2 * x[i - 2];
    const auto r = sig::autocorr(x, 16);
    const LpcCoefficients lpc = levinson_durbin(r, 16);
    for (int i = 0; i < 16; ++i) {
      double lhs = 0.0;
      for (int j = 0; j < 16; ++j) lhs += r[std::abs(i - j)] * lpc.coeffs[j];
      worst = std::max(worst, std::abs(lhs - r[i + 1]));
    }
    const auto ref = sig::solve_normal_equations(r, 16);
    for (int i = 0; i < 16; ++i) worst_vs_solver = std::max(worst_vs_solver, std::abs(ref[i] - lpc.coeffs[i]));
    for (double k : lpc.reflection) CHECK(std::abs(k) < 1.0);
  }
  CHECK(worst < 1e-8);
  CHECK(worst_vs_solver < 1e-8);
}

TEST_CASE("levinson_durbin recovers a random stable AR(16) process") {
  Rng rng(8);
  std::vector<double> k(16);
  for (auto& v : k) v = rng.uniform(-0.6, 0.6);
  const auto truth = stable_ar_from_reflection(k);
  const auto x = sig::ar_process(truth, 400000, 1234);
  const LpcCoefficients est = levinson_durbin(sig::autocorr(x, 16), 16);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(est.coeffs[i] - truth[i]) < 1e-2);
  const auto a = reflection_to_predictor(est.reflection);
  for (int i = 0; i < 16; ++i) CHECK(a[i] == doctest::Approx(est.coeffs[i]).epsilon(1e-9));
}

TEST_CASE("bfcc_to_lpc of white noise is nearly flat") {
  FrameSpec spec;
  const Matrix c = bfcc(sig::white_noise(1.0, 4), spec);
  const Eigen::RowVectorXf mean = c.colwise().mean();
  const LpcCoefficients lpc = bfcc_to_lpc(std::span<const float>(mean.data(), 30), spec);
  double energy = 0.0;
  for (double a : lpc.coeffs) energy += a * a;
  CHECK(std::sqrt(energy) < 0.1);
  // band-average power of N(0, 0.1^2) noise
  CHECK(lpc.gain == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("bfcc_to_lpc envelope peaks at an AR(2) resonance") {
  FrameSpec spec;
  const double fr = 1500.0, radius = 0.97;
  const double w0 = 2 * M_PI * fr / 16000;
  const auto x = sig::ar_process({2 * radius * std::cos(w0), -radius * radius}, 16000, 77);
  Waveform w;
  for (double v : x) w.samples.push_back(static_cast<float>(0.01 * v));
  const Matrix c = bfcc(w, spec);
  const Eigen::RowVectorXf frame = c.row(50);
  const LpcCoefficients lpc = bfcc_to_lpc(std::span<const float>(frame.data(), 30), spec);
  const auto resp = lpc_power_response(lpc, 257);
  const auto peak = std::max_element(resp.begin(), resp.end()) - resp.begin();
  const double peak_hz = peak * 16000.0 / 512;
  // one Bark band is (bark(8000) - bark(0)) / 31
  const double band = (hz_to_bark(8000) - hz_to_bark(0)) / 31.0;
  CHECK(std::abs(hz_to_bark(peak_hz) - hz_to_bark(fr)) <= band);
}

TEST_CASE("bfcc_to_lpc is invariant to a c0 offset up to gain") {
  FrameSpec spec;
  const Matrix c = bfcc(sig::harmonic([](double) { return 150.0; }, 0.5), spec);
  Eigen::RowVectorXf frame = c.row(20);
  const LpcCoefficients base = bfcc_to_lpc(std::span<const float>(frame.data(), 30), spec);
  const float delta = 4.0f;
  frame(0) += delta;
  const LpcCoefficients shifted = bfcc_to_lpc(std::span<const float>(frame.data(), 30), spec);
  for (int i = 0; i < 16; ++i) CHECK(shifted.coeffs[i] == doctest::Approx(base.coeffs[i]).epsilon(1e-6));
  CHECK(shifted.gain / base.gain == doctest::Approx(std::exp(delta / std::sqrt(30.0) / 2.0)).epsilon(1e-5));
}

TEST_CASE("assemble_acoustic layout and errors") {
  FrameSpec spec;
  PitchTrack p;
  for (int t = 0; t < 100; ++t) {
    const bool voiced = t % 2 == 0;
    p.f0_hz.push_back(voiced ? 200.0f : 0.0f);
    p.vuv.push_back(voiced ? 1.0f : 0.0f);
    p.period_samples.push_back(voiced ? 80.0f : 0.0f);
    p.correlation.push_back(voiced ? 0.9f : 0.1f);
  }
  const Matrix acoustic = assemble_acoustic(Matrix::Zero(100, 30), p, spec);
  CHECK(acoustic.rows() == 100);
  CHECK(acoustic.cols() == 32);
  CHECK(acoustic(0, kPeriodColumn) == doctest::Approx(80.0 / 320.0));
  CHECK(acoustic(1, kPeriodColumn) == normalize_period(0.0, 16000));
  CHECK(acoustic(1, kPeriodColumn) == 0.0f);
  CHECK(acoustic(1, kCorrelationColumn) == doctest::Approx(0.1));
  CHECK_THROWS_AS(assemble_acoustic(Matrix::Zero(101, 30), p, spec), DataError);
  CHECK_THROWS_AS(assemble_acoustic(Matrix::Zero(100, 18), p, spec), DataError);
}
