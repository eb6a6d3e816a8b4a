#ifndef PVC_DSP_LPC_H_
#define PVC_DSP_LPC_H_

#include <span>
#include <vector>

#include "pvc/common.h"
#include "pvc/dsp/frame_spec.h"

namespace pvc {

inline constexpr int kLpcOrder = 16;

// Linear predictor x[n] ~ sum_i coeffs[i] * x[n - 1 - i]. reflection holds
// the PARCOR coefficients of the prediction-error filter
// A(z) = 1 - sum_i coeffs[i] z^-(i+1); gain = sqrt(residual_error).
struct LpcCoefficients {
  int order = 0;
  std::vector<double> coeffs;
  std::vector<double> reflection;
  double residual_error = 0.0;
  double gain = 0.0;
};

// Thrown when the recursion produces |k_i| >= 1, i.e. the input is not a
// valid (positive-definite) autocorrelation sequence.
class UnstableLpcError : public DataError {
 public:
  using DataError::DataError;
};

// Levinson-Durbin recursion on autocorr[0..order]. Throws DataError when
// autocorr[0] <= 0 and UnstableLpcError instead of clamping.
LpcCoefficients levinson_durbin(std::span<const double> autocorr, int order);

// Inverse of the recursion: predictor coefficients from reflection
// coefficients (step-up).
std::vector<double> reflection_to_predictor(std::span<const double> reflection);

// Power response gain^2 / |A(e^jw)|^2 on n_bins points spanning [0, pi].
std::vector<double> lpc_power_response(const LpcCoefficients& lpc, int n_bins);

// Linear-frequency power spectrum (fft_size/2 + 1 bins) implied by 30 BFCCs:
// inverse DCT to Bark band log energies, linear interpolation of the log
// energies between band centres on the Bark axis, held constant outside.
std::vector<double> bfcc_to_power_spectrum(std::span<const float> bfcc_frame, const FrameSpec& spec);

// Autocorrelation lags 0..max_lag of a one-sided power spectrum.
std::vector<double> power_spectrum_to_autocorr(std::span<const double> power, int max_lag);

// bfcc -> power spectrum -> autocorrelation -> order-16 Levinson-Durbin.
LpcCoefficients bfcc_to_lpc(std::span<const float> bfcc_frame, const FrameSpec& spec);

}  // namespace pvc

#endif  // PVC_DSP_LPC_H_
