#include "pvc/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pvc/dsp/spectral.h"

namespace pvc {

DtwResult dtw(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<int>(cost.rows());
  const auto m = static_cast<int>(cost.cols());
  if (n == 0 || m == 0) throw DataError("dtw: empty sequence");
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(n, m, inf);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double best = (i == 0 && j == 0) ? 0.0 : inf;
      if (i > 0) best = std::min(best, acc(i - 1, j));
      if (j > 0) best = std::min(best, acc(i, j - 1));
      if (i > 0 && j > 0) best = std::min(best, acc(i - 1, j - 1));
      acc(i, j) = best + cost(i, j);
    }
  }
  DtwResult out;
  out.total_cost = acc(n - 1, m - 1);
  int i = n - 1, j = m - 1;
  out.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      // Ties prefer the diagonal.
      const double d = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
      if (d <= up && d <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    out.path.emplace_back(i, j);
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

double frame_mcd(const float* a, const float* b, int dims) {
  double sq = 0.0;
  for (int k = 1; k < dims; ++k) {
    const double d = static_cast<double>(a[k]) - b[k];
    sq += d * d;
  }
  return 10.0 / std::log(10.0) * std::sqrt(2.0 * sq);
}

double mcd(const Matrix& ref, const Matrix& hyp) { return mcd(ref, hyp, nullptr); }

double mcd(const Matrix& ref, const Matrix& hyp, DtwPath* path) {
  if (ref.rows() == 0 || hyp.rows() == 0) throw DataError("mcd: empty cepstral sequence");
  if (ref.cols() != hyp.cols()) {
    throw DataError("mcd: cepstral widths differ (" + std::to_string(ref.cols()) + " vs " +
                    std::to_string(hyp.cols()) + ")");
  }
  const auto dims = static_cast<int>(ref.cols());
  Eigen::MatrixXd cost(ref.rows(), hyp.rows());
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    for (Eigen::Index j = 0; j < hyp.rows(); ++j) cost(i, j) = frame_mcd(ref.row(i).data(), hyp.row(j).data(), dims);
  }
  DtwResult r = dtw(cost);
  const double mean = r.total_cost / static_cast<double>(r.path.size());
  if (path) *path = std::move(r.path);
  return mean;
}

F0Metrics f0_metrics(const PitchTrack& ref, const PitchTrack& hyp) {
  if (ref.frames() != hyp.frames()) {
    throw DataError("f0_metrics: frame counts differ (" + std::to_string(ref.frames()) + " vs " +
                    std::to_string(hyp.frames()) + ")");
  }
  F0Metrics out;
  out.n_frames = ref.frames();
  double sq = 0.0;
  int disagree = 0;
  for (int t = 0; t < ref.frames(); ++t) {
    const bool rv = ref.vuv[t] > 0.5f, hv = hyp.vuv[t] > 0.5f;
    if (rv != hv) ++disagree;
    if (rv && hv) {
      const double d = static_cast<double>(ref.f0_hz[t]) - hyp.f0_hz[t];
      sq += d * d;
      ++out.co_voiced;
    }
  }
  if (out.co_voiced > 0) out.f0_rmse_hz = std::sqrt(sq / out.co_voiced);
  if (out.n_frames > 0) out.vuv_error_rate = static_cast<double>(disagree) / out.n_frames;
  return out;
}

namespace {

PitchTrack truncate(const PitchTrack& track, int frames) {
  PitchTrack out = track;
  out.f0_hz.resize(frames);
  out.vuv.resize(frames);
  out.period_samples.resize(frames);
  out.correlation.resize(frames);
  return out;
}

}  // namespace

MetricReport evaluate_pair(const Waveform& ref, const Waveform& hyp, const FrameSpec& spec) {
  if (ref.sample_rate != spec.sample_rate || hyp.sample_rate != spec.sample_rate) {
    throw DataError("evaluate_pair: sample rate differs from the frame spec");
  }
  MetricReport r;
  r.mcd_db = mcd(bfcc(ref, spec), bfcc(hyp, spec));
  const PitchTrack pr = track_pitch(ref, spec), ph = track_pitch(hyp, spec);
  const int frames = std::min(pr.frames(), ph.frames());
  const F0Metrics f = f0_metrics(truncate(pr, frames), truncate(ph, frames));
  r.f0_rmse_hz = f.f0_rmse_hz;
  r.vuv_error_rate = f.vuv_error_rate;
  r.n_frames = frames;
  return r;
}

}  // namespace pvc
