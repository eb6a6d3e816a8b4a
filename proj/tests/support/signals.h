#ifndef PVC_TESTS_SIGNALS_H_
#define PVC_TESTS_SIGNALS_H_

// Test-only signal generators and reference computations. Nothing here calls
// into the library code it is used to check.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "pvc/common.h"
#include "pvc/random.h"

namespace pvc::testing {

inline Waveform sine(double freq, double seconds, int sr = 16000, double amp = 0.5) {
  Waveform w;
  w.sample_rate = sr;
  const auto n = static_cast<size_t>(std::lround(seconds * sr));
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) w.samples[i] = static_cast<float>(amp * std::sin(2 * M_PI * freq * i / sr));
  return w;
}

inline Waveform sawtooth(double freq, double seconds, int sr = 16000, double amp = 0.5) {
  Waveform w;
  w.sample_rate = sr;
  const auto n = static_cast<size_t>(std::lround(seconds * sr));
  w.samples.resize(n);
  double phase = 0.0;
  for (size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(amp * (2.0 * phase - 1.0));
    phase += freq / sr;
    phase -= std::floor(phase);
  }
  return w;
}

// Sum of n_harm harmonics with 1/k amplitudes following an instantaneous f0
// contour; f0_at(seconds) gives the ground truth.
inline Waveform harmonic(const std::function<double(double)>& f0_at, double seconds, int sr = 16000,
                         int n_harm = 10, double amp = 0.3) {
  Waveform w;
  w.sample_rate = sr;
  const auto n = static_cast<size_t>(std::lround(seconds * sr));
  w.samples.resize(n);
  double phase = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double f0 = f0_at(static_cast<double>(i) / sr);
    double v = 0.0;
    for (int k = 1; k <= n_harm; ++k) {
      if (k * f0 < sr / 2.0) v += std::sin(2 * M_PI * k * phase) / k;
    }
    w.samples[i] = static_cast<float>(amp * v);
    phase += f0 / sr;
    phase -= std::floor(phase);
  }
  return w;
}

inline Waveform white_noise(double seconds, uint64_t seed, int sr = 16000, double std_dev = 0.1) {
  Waveform w;
  w.sample_rate = sr;
  Rng rng(seed);
  const auto n = static_cast<size_t>(std::lround(seconds * sr));
  w.samples.resize(n);
  for (auto& s : w.samples) s = static_cast<float>(std_dev * rng.normal());
  return w;
}

inline Waveform silence(double seconds, int sr = 16000) {
  Waveform w;
  w.sample_rate = sr;
  w.samples.assign(static_cast<size_t>(std::lround(seconds * sr)), 0.0f);
  return w;
}

// y[n] = e[n] + sum_i a[i] y[n-1-i], computed in double.
inline std::vector<double> ar_process(const std::vector<double>& a, size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> y(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double v = rng.normal();
    for (size_t j = 0; j < a.size() && j < i; ++j) v += a[j] * y[i - 1 - j];
    y[i] = v;
  }
  return y;
}

// Biased autocorrelation estimate, lags 0..max_lag.
inline std::vector<double> autocorr(const std::vector<double>& x, int max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  for (int k = 0; k <= max_lag; ++k) {
    for (size_t i = k; i < x.size(); ++i) r[k] += x[i] * x[i - k];
    r[k] /= static_cast<double>(x.size());
  }
  return r;
}

// Solves the Toeplitz normal equations R a = r[1..p] by Gaussian elimination
// with partial pivoting; independent of the Levinson recursion.
inline std::vector<double> solve_normal_equations(const std::vector<double>& r, int p) {
  std::vector<std::vector<double>> m(p, std::vector<double>(p + 1));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) m[i][j] = r[std::abs(i - j)];
    m[i][p] = r[i + 1];
  }
  for (int c = 0; c < p; ++c) {
    int piv = c;
    for (int i = c + 1; i < p; ++i)
      if (std::abs(m[i][c]) > std::abs(m[piv][c])) piv = i;
    std::swap(m[c], m[piv]);
    for (int i = c + 1; i < p; ++i) {
      const double f = m[i][c] / m[c][c];
      for (int j = c; j <= p; ++j) m[i][j] -= f * m[c][j];
    }
  }
  std::vector<double> a(p);
  for (int i = p - 1; i >= 0; --i) {
    double v = m[i][p];
    for (int j = i + 1; j < p; ++j) v -= m[i][j] * a[j];
    a[i] = v / m[i][i];
  }
  return a;
}

// Writes a canonical 44-byte-header WAV with arbitrary format fields.
inline void write_raw_wav(const std::filesystem::path& path, uint16_t format, uint16_t channels,
                          uint32_t rate, uint16_t bits, const std::vector<uint8_t>& data) {
  auto u32 = [](std::ofstream& f, uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [](std::ofstream& f, uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
  std::ofstream f(path, std::ios::binary);
  f.write("RIFF", 4);
  u32(f, 36 + static_cast<uint32_t>(data.size()));
  f.write("WAVEfmt ", 8);
  u32(f, 16);
  u16(f, format);
  u16(f, channels);
  u32(f, rate);
  u32(f, rate * channels * bits / 8);
  u16(f, static_cast<uint16_t>(channels * bits / 8));
  u16(f, bits);
  f.write("data", 4);
  u32(f, static_cast<uint32_t>(data.size()));
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pvc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace pvc::testing

#endif  // PVC_TESTS_SIGNALS_H_
