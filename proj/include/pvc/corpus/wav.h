#ifndef PVC_CORPUS_WAV_H_
#define PVC_CORPUS_WAV_H_

#include <filesystem>

#include "pvc/common.h"

namespace pvc {

// Reads a RIFF/WAVE file holding 16-bit mono PCM. Samples are scaled by
// 1/32768. Throws DataError naming the path for unreadable files,
// multi-channel audio or any other encoding.
Waveform load_wav(const std::filesystem::path& path);

// Writes 16-bit mono PCM, clipping to [-1, 1).
void save_wav(const std::filesystem::path& path, const Waveform& wave);

}  // namespace pvc

#endif  // PVC_CORPUS_WAV_H_
