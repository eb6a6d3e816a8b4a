#ifndef PVC_DSP_SPECTRAL_H_
#define PVC_DSP_SPECTRAL_H_

#include <span>
#include <vector>

#include "pvc/common.h"
#include "pvc/dsp/frame_spec.h"

namespace pvc {

inline constexpr int kMelDim = 80;
inline constexpr int kBarkBands = 30;
inline constexpr double kLogFloor = 1e-10;

// Power spectrogram, T x (fft_size/2 + 1). Frames use a Hann window of
// win_s centred in fft_size, reflection padding of fft_size/2 at both ends,
// and are scaled by 1/sum(w^2) so that a white signal of variance s^2 has a
// flat spectrum of height s^2. Throws DataError when the wave is shorter than
// one window.
Matrix power_spectrogram(const Waveform& wave, const FrameSpec& spec);

// Slaney-style mel filterbank (area-normalised triangles), n_mels x bins.
Matrix mel_filterbank(int sample_rate, int fft_size, int n_mels);

// Centre frequencies (Hz) of the mel filters.
std::vector<double> mel_center_frequencies(int sample_rate, int n_mels);

// Traunmüller approximation.
double hz_to_bark(double hz);
double bark_to_hz(double bark);

// Triangles equally spaced on the Bark scale over [0, sample_rate/2], each
// normalised to unit sum so a band energy is the mean power under the band.
Matrix bark_filterbank(int sample_rate, int fft_size, int n_bands);
std::vector<double> bark_center_frequencies(int sample_rate, int n_bands);

// Orthonormal DCT-II and its inverse (DCT-III).
std::vector<double> dct_ortho(std::span<const double> x);
std::vector<double> idct_ortho(std::span<const double> c);

// T x 80 natural-log mel energies, floored at kLogFloor.
Matrix stft_mel(const Waveform& wave, const FrameSpec& spec);

// T x 30 natural-log Bark band energies, floored at kLogFloor.
Matrix bark_log_energies(const Waveform& wave, const FrameSpec& spec);

// T x 30 BFCCs: DCT of bark_log_energies.
Matrix bfcc(const Waveform& wave, const FrameSpec& spec);

}  // namespace pvc

#endif  // PVC_DSP_SPECTRAL_H_
