#include "pvc/dsp/pitch.h"

#include <algorithm>
#include <cmath>

namespace pvc {

int PitchTrack::voiced_frames() const {
  return static_cast<int>(std::count_if(vuv.begin(), vuv.end(), [](float v) { return v > 0.5f; }));
}

Matrix PitchTrack::to_matrix() const {
  Matrix m(frames(), 4);
  for (int t = 0; t < frames(); ++t) {
    m(t, 0) = f0_hz[t];
    m(t, 1) = vuv[t];
    m(t, 2) = period_samples[t];
    m(t, 3) = correlation[t];
  }
  return m;
}

PitchTrack PitchTrack::from_matrix(const Matrix& m) {
  if (m.cols() != 4) throw DataError("pitch payload must have 4 columns");
  PitchTrack p;
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    p.f0_hz.push_back(m(t, 0));
    p.vuv.push_back(m(t, 1));
    p.period_samples.push_back(m(t, 2));
    p.correlation.push_back(m(t, 3));
  }
  return p;
}

void PitchTrack::validate(int sample_rate) const {
  const size_t n = f0_hz.size();
  if (vuv.size() != n || period_samples.size() != n || correlation.size() != n) {
    throw DataError("pitch track columns have different lengths");
  }
  for (size_t t = 0; t < n; ++t) {
    const bool voiced = vuv[t] == 1.0f;
    if (!voiced && vuv[t] != 0.0f) throw DataError("vuv must be binary");
    if (voiced != (f0_hz[t] > 0.0f)) throw DataError("vuv disagrees with f0 at frame " + std::to_string(t));
    if (voiced && std::abs(period_samples[t] - sample_rate / f0_hz[t]) > 1e-3f * period_samples[t]) {
      throw DataError("period disagrees with f0 at frame " + std::to_string(t));
    }
    if (!(correlation[t] >= 0.0f && correlation[t] <= 1.0f)) {
      throw DataError("correlation outside [0, 1] at frame " + std::to_string(t));
    }
  }
}

PitchTrack track_pitch(const Waveform& wave, const FrameSpec& spec, const PitchConfig& config) {
  spec.validate();
  const int sr = spec.sample_rate;
  const int hop = spec.hop_samples();
  const int frames = spec.num_frames(wave.samples.size());
  const int width = static_cast<int>(std::lround(config.window_s * sr));
  const int lag_min = std::max(2, static_cast<int>(std::floor(sr / config.f0_max)));
  const int lag_max = static_cast<int>(std::ceil(sr / config.f0_min));

  // zero-padded copy so every comparison window is in range
  const int margin = (width + lag_max) / 2 + 2;
  const auto n = static_cast<long>(wave.samples.size());
  std::vector<double> x(static_cast<size_t>(n + 2 * margin + 1), 0.0);
  for (long i = 0; i < n; ++i) x[static_cast<size_t>(i + margin)] = wave.samples[static_cast<size_t>(i)];
  std::vector<double> energy(x.size() + 1, 0.0);
  for (size_t i = 0; i < x.size(); ++i) energy[i + 1] = energy[i] + x[i] * x[i];
  auto segment_energy = [&](long start) {
    return energy[static_cast<size_t>(start + width)] - energy[static_cast<size_t>(start)];
  };

  PitchTrack track;
  track.f0_hz.assign(frames, 0.0f);
  track.vuv.assign(frames, 0.0f);
  track.period_samples.assign(frames, 0.0f);
  track.correlation.assign(frames, 0.0f);

  std::vector<double> nccf(static_cast<size_t>(lag_max + 2), 0.0);
  for (int t = 0; t < frames; ++t) {
    const long center = static_cast<long>(t) * hop + margin;
    std::fill(nccf.begin(), nccf.end(), 0.0);
    double best = 0.0;
    for (int lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      // both segments placed symmetrically around the frame centre
      const long s = center - (width + lag) / 2;
      const double e1 = segment_energy(s), e2 = segment_energy(s + lag);
      const double denom = std::sqrt(e1 * e2);
      if (denom <= 1e-12) continue;
      double acc = 0.0;
      const double* a = x.data() + s;
      const double* b = a + lag;
      for (int i = 0; i < width; ++i) acc += a[i] * b[i];
      nccf[static_cast<size_t>(lag)] = acc / denom;
      if (lag >= lag_min && lag <= lag_max) best = std::max(best, nccf[static_cast<size_t>(lag)]);
    }
    if (best <= 0.0) continue;

    // shortest-lag local maximum close to the global best guards against
    // picking a multiple of the true period
    int pick = -1;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      const double v = nccf[static_cast<size_t>(lag)];
      if (v >= nccf[static_cast<size_t>(lag - 1)] && v > nccf[static_cast<size_t>(lag + 1)] &&
          v >= 0.85 * best) {
        pick = lag;
        break;
      }
    }
    if (pick < 0) continue;
    const double ym = nccf[static_cast<size_t>(pick - 1)], y0 = nccf[static_cast<size_t>(pick)],
                 yp = nccf[static_cast<size_t>(pick + 1)];
    const double curv = ym - 2.0 * y0 + yp;
    double delta = 0.0, peak = y0;
    if (curv < 0.0) {
      delta = std::clamp(0.5 * (ym - yp) / curv, -0.5, 0.5);
      peak = y0 - 0.25 * (ym - yp) * delta;
    }
    const double corr = std::clamp(peak, 0.0, 1.0);
    track.correlation[t] = static_cast<float>(corr);
    const double f0 = sr / (pick + delta);
    if (corr >= config.vuv_threshold && f0 >= config.f0_min && f0 <= config.f0_max) {
      track.f0_hz[t] = static_cast<float>(f0);
      track.vuv[t] = 1.0f;
    }
  }

  if (config.median_width > 1) {
    const int half = config.median_width / 2;
    std::vector<float> smoothed = track.f0_hz;
    std::vector<float> window;
    for (int t = 0; t < frames; ++t) {
      if (track.vuv[t] == 0.0f) continue;
      window.clear();
      for (int u = std::max(0, t - half); u <= std::min(frames - 1, t + half); ++u) {
        if (track.vuv[u] != 0.0f) window.push_back(track.f0_hz[u]);
      }
      std::sort(window.begin(), window.end());
      const size_t m = window.size();
      smoothed[t] = m % 2 ? window[m / 2] : 0.5f * (window[m / 2 - 1] + window[m / 2]);
    }
    track.f0_hz = std::move(smoothed);
  }
  for (int t = 0; t < frames; ++t) {
    if (track.vuv[t] != 0.0f) track.period_samples[t] = static_cast<float>(sr / static_cast<double>(track.f0_hz[t]));
  }
  return track;
}

}  // namespace pvc
