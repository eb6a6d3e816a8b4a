#include "pvc/augment/speed_perturb.h"

#include <charconv>
#include <cmath>
#include <set>

namespace pvc {
namespace {

void check_factor(double factor, const WsolaConfig& config) {
  if (!(factor >= config.min_factor && factor <= config.max_factor)) {
    throw UsageError("speed factor " + std::to_string(factor) + " outside [" +
                     std::to_string(config.min_factor) + ", " + std::to_string(config.max_factor) + "]");
  }
}

}  // namespace

Waveform time_stretch(const Waveform& wave, double factor, const WsolaConfig& config) {
  check_factor(factor, config);
  const int sr = wave.sample_rate;
  const auto n_in = static_cast<long>(wave.samples.size());
  if (n_in < sr / 10) throw DataError("time_stretch needs at least 100 ms of audio");
  if (factor == 1.0) return wave;

  const int half = static_cast<int>(std::lround(config.frame_s * sr / 2));
  const int len = 2 * half;
  const int tol = static_cast<int>(std::lround(config.search_s * sr));
  const long n_out = std::lround(static_cast<double>(n_in) / factor);

  std::vector<double> window(len);
  for (int i = 0; i < len; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / len);

  const long pad = len + tol + 1;
  std::vector<double> x(static_cast<size_t>(n_in + 2 * pad), 0.0);
  for (long i = 0; i < n_in; ++i) x[static_cast<size_t>(i + pad)] = wave.samples[static_cast<size_t>(i)];
  auto at = [&](long i) -> const double* { return x.data() + i + pad; };
  auto clamp_center = [&](long c) { return std::clamp(c, -pad + half, n_in + pad - half - 1); };

  std::vector<double> y(static_cast<size_t>(n_out + len), 0.0);
  long prev = 0;
  for (long k = 0; k * half < n_out + half; ++k) {
    const long out_center = k * half;
    long center = 0;
    if (k > 0) {
      const long nominal = std::lround(static_cast<double>(out_center) * factor);
      const long natural = clamp_center(prev + half);
      const double* tmpl = at(natural - half);
      double best = -INFINITY;
      for (long c = nominal - tol; c <= nominal + tol; ++c) {
        const long cc = clamp_center(c);
        const double* cand = at(cc - half);
        double acc = 0.0;
        for (int i = 0; i < len; ++i) acc += cand[i] * tmpl[i];
        if (acc > best) {
          best = acc;
          center = cc;
        }
      }
    }
    const double* src = at(center - half);
    for (int i = 0; i < len; ++i) {
      const long o = out_center - half + i;
      if (o >= 0 && o < n_out) y[static_cast<size_t>(o)] += window[i] * src[i];
    }
    prev = center;
  }

  Waveform out;
  out.sample_rate = sr;
  out.samples.resize(static_cast<size_t>(n_out));
  for (long i = 0; i < n_out; ++i) out.samples[static_cast<size_t>(i)] = static_cast<float>(y[static_cast<size_t>(i)]);
  return out;
}

std::string augmented_id(const std::string& id, double factor) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), factor);
  return id + "_sp" + std::string(buf, end);
}

Manifest expand_manifest(const Manifest& manifest, std::span<const double> factors,
                         const WsolaConfig& config) {
  std::set<double> seen;
  for (double f : factors) {
    check_factor(f, config);
    if (!seen.insert(f).second) throw UsageError("duplicate factor " + std::to_string(f));
  }
  if (factors.empty()) return manifest;
  Manifest out;
  out.split = manifest.split;
  for (const auto& u : manifest.entries) {
    for (double f : factors) {
      if (f == 1.0) {
        out.entries.push_back(u);
        continue;
      }
      Utterance a = u;
      a.id = augmented_id(u.id, f);
      a.duration_s = u.duration_s / f;
      a.speed = u.speed * f;
      out.entries.push_back(std::move(a));
    }
  }
  return out;
}

}  // namespace pvc
