#ifndef PVC_PITCHSTATS_PITCH_STATS_H_
#define PVC_PITCHSTATS_PITCH_STATS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "pvc/dsp/pitch.h"

namespace pvc {

// Natural-log f0 statistics over voiced frames. sigma is the (population)
// standard deviation.
struct PitchStats {
  double mu = 0.0;
  double sigma = 0.0;
  int64_t n_frames = 0;
};

inline constexpr int64_t kMinStatsFrames = 100;

// Throws DataError when fewer than min_frames frames are voiced or the
// voiced log-f0 has zero variance.
PitchStats estimate_stats(std::span<const PitchTrack> tracks, int64_t min_frames = kMinStatsFrames);

// (log_f0 - src.mu) * (tgt.sigma / src.sigma) + tgt.mu
double convert_log_f0(double log_f0, const PitchStats& src, const PitchStats& tgt);

// Applies convert_log_f0 to voiced frames and recomputes their period.
// Unvoiced frames, vuv and correlation pass through unchanged. Throws
// DataError when src.sigma is not positive.
PitchTrack convert_f0(const PitchTrack& track, const PitchStats& src, const PitchStats& tgt,
                      int sample_rate);

// "mu <v>\nsigma <v>\nn_frames <n>\n"
std::string format_stats(const PitchStats& stats);
PitchStats parse_stats(const std::string& text);
void save_stats(const std::filesystem::path& path, const PitchStats& stats);
PitchStats load_stats(const std::filesystem::path& path);

}  // namespace pvc

#endif  // PVC_PITCHSTATS_PITCH_STATS_H_
