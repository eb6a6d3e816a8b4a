#include "pvc/pitchstats/pitch_stats.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace pvc {

PitchStats estimate_stats(std::span<const PitchTrack> tracks, int64_t min_frames) {
  int64_t n = 0;
  double sum = 0.0;
  for (const auto& track : tracks) {
    for (int t = 0; t < track.frames(); ++t) {
      if (track.vuv[t] != 0.0f && track.f0_hz[t] > 0.0f) {
        sum += std::log(static_cast<double>(track.f0_hz[t]));
        ++n;
      }
    }
  }
  if (n < min_frames || n == 0) {
    throw DataError("insufficient voiced frames for pitch statistics (" + std::to_string(n) +
                    " < " + std::to_string(min_frames) + ")");
  }
  const double mu = sum / static_cast<double>(n);
  double sq = 0.0;
  for (const auto& track : tracks) {
    for (int t = 0; t < track.frames(); ++t) {
      if (track.vuv[t] != 0.0f && track.f0_hz[t] > 0.0f) {
        const double d = std::log(static_cast<double>(track.f0_hz[t])) - mu;
        sq += d * d;
      }
    }
  }
  const double sigma = std::sqrt(sq / static_cast<double>(n));
  if (!(sigma > 1e-12)) throw DataError("zero log-f0 variance (constant pitch)");
  return {mu, sigma, n};
}

double convert_log_f0(double log_f0, const PitchStats& src, const PitchStats& tgt) {
  return (log_f0 - src.mu) * (tgt.sigma / src.sigma) + tgt.mu;
}

PitchTrack convert_f0(const PitchTrack& track, const PitchStats& src, const PitchStats& tgt,
                      int sample_rate) {
  if (!(src.sigma > 0.0)) throw DataError("convert_f0: source sigma must be positive");
  PitchTrack out = track;
  for (int t = 0; t < track.frames(); ++t) {
    if (track.vuv[t] == 0.0f || track.f0_hz[t] <= 0.0f) continue;
    const double f0 = std::exp(convert_log_f0(std::log(static_cast<double>(track.f0_hz[t])), src, tgt));
    out.f0_hz[t] = static_cast<float>(f0);
    out.period_samples[t] = static_cast<float>(sample_rate / f0);
  }
  return out;
}

std::string format_stats(const PitchStats& stats) {
  std::ostringstream out;
  out.precision(17);
  out << "mu " << stats.mu << "\nsigma " << stats.sigma << "\nn_frames " << stats.n_frames << "\n";
  return out.str();
}

PitchStats parse_stats(const std::string& text) {
  std::istringstream in(text);
  PitchStats s;
  bool have_mu = false, have_sigma = false, have_n = false;
  std::string key;
  while (in >> key) {
    if (key == "mu") have_mu = static_cast<bool>(in >> s.mu);
    else if (key == "sigma") have_sigma = static_cast<bool>(in >> s.sigma);
    else if (key == "n_frames") have_n = static_cast<bool>(in >> s.n_frames);
    else throw DataError("pitch stats: unknown key '" + key + "'");
  }
  if (!have_mu || !have_sigma || !have_n) throw DataError("pitch stats: expected mu, sigma and n_frames");
  if (!std::isfinite(s.mu) || !(s.sigma > 0.0)) throw DataError("pitch stats: invalid values");
  return s;
}

void save_stats(const std::filesystem::path& path, const PitchStats& stats) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot write pitch stats");
  out << format_stats(stats);
}

PitchStats load_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot read pitch stats");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_stats(ss.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace pvc
