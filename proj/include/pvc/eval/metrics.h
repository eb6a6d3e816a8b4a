#ifndef PVC_EVAL_METRICS_H_
#define PVC_EVAL_METRICS_H_

#include <utility>
#include <vector>

#include "pvc/common.h"
#include "pvc/dsp/frame_spec.h"
#include "pvc/dsp/pitch.h"

namespace pvc {

// Aligned (ref frame, hyp frame) pairs from (0, 0) to (T - 1, T' - 1); each
// step advances one or both indices by one.
using DtwPath = std::vector<std::pair<int, int>>;

struct DtwResult {
  DtwPath path;
  double total_cost = 0.0;
};

// Minimum-cost alignment under the local cost matrix cost(i, j).
DtwResult dtw(const Eigen::MatrixXd& cost);

// Per-frame distortion (10 / ln 10) * sqrt(2 * sum_{k>=1} (a_k - b_k)^2) in dB.
double frame_mcd(const float* a, const float* b, int dims);

// Mel-cepstral distortion between two T x D cepstral sequences (c0 excluded),
// averaged over the DTW path. Throws DataError on empty input or a width
// mismatch.
double mcd(const Matrix& ref, const Matrix& hyp);
double mcd(const Matrix& ref, const Matrix& hyp, DtwPath* path);

struct F0Metrics {
  double f0_rmse_hz = 0.0;  // over frames voiced in both; 0 when there are none
  double vuv_error_rate = 0.0;
  int n_frames = 0;
  int co_voiced = 0;
};

// Inputs must have equal frame counts (DataError otherwise).
F0Metrics f0_metrics(const PitchTrack& ref, const PitchTrack& hyp);

struct MetricReport {
  double mcd_db = 0.0;
  double f0_rmse_hz = 0.0;
  double vuv_error_rate = 0.0;
  int n_frames = 0;
};

// BFCC MCD plus f0 metrics for a reference and converted waveform. The pitch
// tracks are truncated to the shorter of the two.
MetricReport evaluate_pair(const Waveform& ref, const Waveform& hyp, const FrameSpec& spec);

}  // namespace pvc

#endif  // PVC_EVAL_METRICS_H_
