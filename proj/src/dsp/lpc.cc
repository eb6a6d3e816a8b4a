#include "pvc/dsp/lpc.h"

#include <cmath>
#include <complex>

#include "pvc/dsp/spectral.h"

namespace pvc {
namespace {

// White-noise correction on r[0], about -60 dB.
constexpr double kNoiseFloor = 1e-6;

}  // namespace

LpcCoefficients levinson_durbin(std::span<const double> autocorr, int order) {
  if (order < 1 || autocorr.size() < static_cast<size_t>(order) + 1) {
    throw DataError("levinson_durbin needs order + 1 autocorrelation lags");
  }
  if (!(autocorr[0] > 0.0)) throw DataError("levinson_durbin: r[0] must be positive");

  // alpha holds the prediction-error filter 1 + sum alpha_j z^-j
  std::vector<double> alpha(order + 1, 0.0), prev(order + 1, 0.0);
  alpha[0] = 1.0;
  double err = autocorr[0];
  LpcCoefficients out;
  out.order = order;
  out.reflection.resize(order);
  for (int i = 1; i <= order; ++i) {
    double acc = 0.0;
    for (int j = 0; j < i; ++j) acc += alpha[j] * autocorr[i - j];
    const double k = -acc / err;
    if (!(std::abs(k) < 1.0)) {
      throw UnstableLpcError("levinson_durbin: reflection coefficient " + std::to_string(i) +
                             " has |k| >= 1 (invalid autocorrelation)");
    }
    out.reflection[i - 1] = k;
    prev = alpha;
    for (int j = 1; j < i; ++j) alpha[j] = prev[j] + k * prev[i - j];
    alpha[i] = k;
    err *= (1.0 - k * k);
  }
  out.coeffs.resize(order);
  for (int j = 0; j < order; ++j) out.coeffs[j] = -alpha[j + 1];
  out.residual_error = err;
  out.gain = std::sqrt(err);
  return out;
}

std::vector<double> reflection_to_predictor(std::span<const double> reflection) {
  const int order = static_cast<int>(reflection.size());
  std::vector<double> alpha(order + 1, 0.0), prev;
  alpha[0] = 1.0;
  for (int i = 1; i <= order; ++i) {
    const double k = reflection[i - 1];
    prev = alpha;
    for (int j = 1; j < i; ++j) alpha[j] = prev[j] + k * prev[i - j];
    alpha[i] = k;
  }
  std::vector<double> a(order);
  for (int j = 0; j < order; ++j) a[j] = -alpha[j + 1];
  return a;
}

std::vector<double> lpc_power_response(const LpcCoefficients& lpc, int n_bins) {
  std::vector<double> out(n_bins);
  for (int b = 0; b < n_bins; ++b) {
    const double w = n_bins > 1 ? M_PI * b / (n_bins - 1) : 0.0;
    std::complex<double> a(1.0, 0.0);
    for (int i = 0; i < lpc.order; ++i) a -= lpc.coeffs[i] * std::polar(1.0, -w * (i + 1));
    out[b] = lpc.gain * lpc.gain / std::norm(a);
  }
  return out;
}

std::vector<double> bfcc_to_power_spectrum(std::span<const float> bfcc_frame, const FrameSpec& spec) {
  if (bfcc_frame.size() != static_cast<size_t>(kBarkBands)) {
    throw DataError("bfcc frame must have 30 coefficients");
  }
  std::vector<double> c(bfcc_frame.begin(), bfcc_frame.end());
  for (double v : c) {
    if (!std::isfinite(v)) throw DataError("bfcc_to_lpc: non-finite coefficient");
  }
  const std::vector<double> log_e = idct_ortho(c);
  const auto centers = bark_center_frequencies(spec.sample_rate, kBarkBands);
  std::vector<double> center_bark(kBarkBands);
  for (int m = 0; m < kBarkBands; ++m) center_bark[m] = hz_to_bark(centers[m]);

  const int bins = spec.fft_size / 2 + 1;
  std::vector<double> power(bins);
  int band = 0;
  for (int k = 0; k < bins; ++k) {
    const double z = hz_to_bark(static_cast<double>(k) * spec.sample_rate / spec.fft_size);
    double le;
    if (z <= center_bark.front()) {
      le = log_e.front();
    } else if (z >= center_bark.back()) {
      le = log_e.back();
    } else {
      while (center_bark[band + 1] < z) ++band;
      const double frac = (z - center_bark[band]) / (center_bark[band + 1] - center_bark[band]);
      le = (1.0 - frac) * log_e[band] + frac * log_e[band + 1];
    }
    power[k] = std::exp(le);
  }
  return power;
}

std::vector<double> power_spectrum_to_autocorr(std::span<const double> power, int max_lag) {
  const int bins = static_cast<int>(power.size());
  const int n = 2 * (bins - 1);
  std::vector<double> r(max_lag + 1, 0.0);
  for (int lag = 0; lag <= max_lag; ++lag) {
    double acc = power[0] + power[bins - 1] * ((lag % 2) ? -1.0 : 1.0);
    for (int b = 1; b < bins - 1; ++b) acc += 2.0 * power[b] * std::cos(2.0 * M_PI * lag * b / n);
    r[lag] = acc / n;
  }
  return r;
}

LpcCoefficients bfcc_to_lpc(std::span<const float> bfcc_frame, const FrameSpec& spec) {
  const auto power = bfcc_to_power_spectrum(bfcc_frame, spec);
  auto r = power_spectrum_to_autocorr(power, kLpcOrder);
  r[0] *= 1.0 + kNoiseFloor;
  return levinson_durbin(r, kLpcOrder);
}

}  // namespace pvc
