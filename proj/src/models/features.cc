#include "pvc/models/features.h"

#include <cmath>

namespace pvc {
namespace {

const double kLogF0Lo = std::log(50.0);
const double kLogF0Hi = std::log(600.0);

}  // namespace

std::string_view mode_name(InputMode mode) {
  return mode == InputMode::kBaseline ? "baseline" : "proposed";
}

InputMode parse_mode(std::string_view name) {
  if (name == "baseline") return InputMode::kBaseline;
  if (name == "proposed") return InputMode::kProposed;
  throw UsageError("unknown mode '" + std::string(name) + "' (expected baseline or proposed)");
}

int input_dim(InputMode mode, int d_p, int d_e) {
  return mode == InputMode::kBaseline ? d_p + 2 : d_p + d_e + 2;
}

float encode_f0(float f0_hz, float vuv) {
  if (vuv <= 0.0f || f0_hz <= 0.0f) return 0.0f;
  return static_cast<float>((std::log(static_cast<double>(f0_hz)) - kLogF0Lo) / (kLogF0Hi - kLogF0Lo));
}

Matrix assemble_input(const Matrix& ppg, const PitchTrack& pitch, const Matrix* prosody, InputMode mode) {
  const auto frames = ppg.rows();
  if (pitch.frames() != frames) {
    throw DataError("assemble_input: ppg has " + std::to_string(frames) + " frames, pitch has " +
                    std::to_string(pitch.frames()));
  }
  if (mode == InputMode::kProposed && prosody == nullptr) {
    throw DataError("assemble_input: proposed mode needs prosody embeddings");
  }
  if (mode == InputMode::kBaseline && prosody != nullptr) {
    throw DataError("assemble_input: baseline mode takes no prosody embeddings");
  }
  if (prosody && prosody->rows() != frames) {
    throw DataError("assemble_input: prosody has " + std::to_string(prosody->rows()) + " frames, ppg has " +
                    std::to_string(frames));
  }
  const Eigen::Index d_p = ppg.cols();
  const Eigen::Index d_e = prosody ? prosody->cols() : 0;
  Matrix out(frames, d_p + 2 + d_e);
  out.leftCols(d_p) = ppg;
  for (Eigen::Index t = 0; t < frames; ++t) {
    out(t, d_p) = encode_f0(pitch.f0_hz[t], pitch.vuv[t]);
    out(t, d_p + 1) = pitch.vuv[t] > 0.0f ? 1.0f : 0.0f;
  }
  if (prosody) out.rightCols(d_e) = *prosody;
  return out;
}

}  // namespace pvc
