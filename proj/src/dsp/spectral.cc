#include "pvc/dsp/spectral.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace pvc {
namespace {

struct FftwFree {
  void operator()(double* p) const { fftw_free(p); }
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
fftw_plan r2c_plan(int n) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n / 2 + 1));
  fftw_plan p = fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE);
  plans.emplace(n, p);
  return p;
}

double hz_to_mel_slaney(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return hz < min_log_hz ? hz / f_sp : min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz_slaney(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return mel < min_log_mel ? f_sp * mel : min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

// Triangles with edges[m], edges[m+1], edges[m+2] (Hz).
Matrix triangles(const std::vector<double>& edges, int sample_rate, int fft_size) {
  const int bins = fft_size / 2 + 1;
  const int n = static_cast<int>(edges.size()) - 2;
  Matrix fb = Matrix::Zero(n, bins);
  for (int m = 0; m < n; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      double w = 0.0;
      if (f > lo && f < mid) w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi) w = (hi - f) / (hi - mid);
      fb(m, k) = static_cast<float>(std::max(0.0, w));
    }
  }
  return fb;
}

Matrix log_band_energies(const Matrix& power, const Matrix& fb) {
  Eigen::MatrixXd p = power.cast<double>();
  Eigen::MatrixXd e = p * fb.cast<double>().transpose();
  Matrix out(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      out(i, j) = static_cast<float>(std::log(std::max(e(i, j), kLogFloor)));
    }
  }
  return out;
}

}  // namespace

Matrix power_spectrogram(const Waveform& wave, const FrameSpec& spec) {
  spec.validate();
  const int n_fft = spec.fft_size;
  const int win = spec.win_samples();
  const int hop = spec.hop_samples();
  const auto n = static_cast<long>(wave.samples.size());
  if (n < win) {
    throw DataError("wave shorter than one analysis window (" + std::to_string(n) + " < " +
                    std::to_string(win) + " samples)");
  }
  const long pad = n_fft / 2;
  auto sample_at = [&](long i) -> double {
    // reflect without repeating the edge sample
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
    }
    return wave.samples[static_cast<size_t>(i)];
  };

  std::vector<double> window(n_fft, 0.0);
  const int offset = (n_fft - win) / 2;
  double wsum2 = 0.0;
  for (int i = 0; i < win; ++i) {
    // periodic Hann
    const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / win);
    window[offset + i] = w;
    wsum2 += w * w;
  }

  const int frames = spec.num_frames(wave.samples.size());
  const int bins = n_fft / 2 + 1;
  Matrix power(frames, bins);
  fftw_plan plan = r2c_plan(n_fft);
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n_fft));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(bins));
  for (int t = 0; t < frames; ++t) {
    const long start = static_cast<long>(t) * hop - pad;
    for (int i = 0; i < n_fft; ++i) in.get()[i] = window[i] * sample_at(start + i);
    fftw_execute_dft_r2c(plan, in.get(), out.get());
    for (int k = 0; k < bins; ++k) {
      const double re = out.get()[k][0], im = out.get()[k][1];
      power(t, k) = static_cast<float>((re * re + im * im) / wsum2);
    }
  }
  return power;
}

std::vector<double> mel_center_frequencies(int sample_rate, int n_mels) {
  const double top = hz_to_mel_slaney(sample_rate / 2.0);
  std::vector<double> centers(n_mels);
  for (int m = 0; m < n_mels; ++m) centers[m] = mel_to_hz_slaney(top * (m + 1) / (n_mels + 1));
  return centers;
}

Matrix mel_filterbank(int sample_rate, int fft_size, int n_mels) {
  const double top = hz_to_mel_slaney(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) edges[i] = mel_to_hz_slaney(top * i / (n_mels + 1));
  Matrix fb = triangles(edges, sample_rate, fft_size);
  for (int m = 0; m < n_mels; ++m) fb.row(m) *= static_cast<float>(2.0 / (edges[m + 2] - edges[m]));
  return fb;
}

double hz_to_bark(double hz) { return 26.81 * hz / (1960.0 + hz) - 0.53; }

double bark_to_hz(double bark) { return 1960.0 * (bark + 0.53) / (26.28 - bark); }

std::vector<double> bark_center_frequencies(int sample_rate, int n_bands) {
  const double lo = hz_to_bark(0.0), hi = hz_to_bark(sample_rate / 2.0);
  std::vector<double> centers(n_bands);
  for (int m = 0; m < n_bands; ++m) centers[m] = bark_to_hz(lo + (hi - lo) * (m + 1) / (n_bands + 1));
  return centers;
}

Matrix bark_filterbank(int sample_rate, int fft_size, int n_bands) {
  const double lo = hz_to_bark(0.0), hi = hz_to_bark(sample_rate / 2.0);
  std::vector<double> edges(n_bands + 2);
  for (int i = 0; i < n_bands + 2; ++i) edges[i] = bark_to_hz(lo + (hi - lo) * i / (n_bands + 1));
  edges.front() = 0.0;
  edges.back() = sample_rate / 2.0;
  Matrix fb = triangles(edges, sample_rate, fft_size);
  for (int m = 0; m < n_bands; ++m) {
    const float s = fb.row(m).sum();
    if (s <= 0.0f) throw UsageError("Bark band " + std::to_string(m) + " covers no FFT bin");
    fb.row(m) /= s;
  }
  return fb;
}

std::vector<double> dct_ortho(std::span<const double> x) {
  const size_t n = x.size();
  std::vector<double> c(n, 0.0);
  for (size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += x[i] * std::cos(M_PI * k * (2.0 * i + 1.0) / (2.0 * n));
    c[k] = acc * std::sqrt((k == 0 ? 1.0 : 2.0) / n);
  }
  return c;
}

std::vector<double> idct_ortho(std::span<const double> c) {
  const size_t n = c.size();
  std::vector<double> x(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) {
      acc += c[k] * std::sqrt((k == 0 ? 1.0 : 2.0) / n) *
             std::cos(M_PI * k * (2.0 * i + 1.0) / (2.0 * n));
    }
    x[i] = acc;
  }
  return x;
}

Matrix stft_mel(const Waveform& wave, const FrameSpec& spec) {
  const Matrix power = power_spectrogram(wave, spec);
  return log_band_energies(power, mel_filterbank(spec.sample_rate, spec.fft_size, kMelDim));
}

Matrix bark_log_energies(const Waveform& wave, const FrameSpec& spec) {
  const Matrix power = power_spectrogram(wave, spec);
  return log_band_energies(power, bark_filterbank(spec.sample_rate, spec.fft_size, kBarkBands));
}

Matrix bfcc(const Waveform& wave, const FrameSpec& spec) {
  const Matrix bands = bark_log_energies(wave, spec);
  Matrix out(bands.rows(), kBarkBands);
  std::vector<double> row(kBarkBands);
  for (Eigen::Index t = 0; t < bands.rows(); ++t) {
    for (int m = 0; m < kBarkBands; ++m) row[m] = bands(t, m);
    const auto c = dct_ortho(row);
    for (int m = 0; m < kBarkBands; ++m) out(t, m) = static_cast<float>(c[m]);
  }
  return out;
}

}  // namespace pvc
