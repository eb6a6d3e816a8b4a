#include "pvc/models/convert.h"

#include "pvc/dsp/acoustic.h"
#include "pvc/dsp/spectral.h"

namespace pvc {

UtteranceFeatures extract_features(const Waveform& wave, const FrameSpec& spec) {
  UtteranceFeatures f;
  f.mel = stft_mel(wave, spec);
  f.pitch = track_pitch(wave, spec);
  f.acoustic = assemble_acoustic(bfcc(wave, spec), f.pitch, spec);
  return f;
}

VcExample make_example(const std::string& id, const UtteranceFeatures& features, const Matrix& ppg) {
  VcExample e;
  e.id = id;
  e.base = assemble_input(ppg, features.pitch, nullptr, InputMode::kBaseline);
  e.mel = features.mel;
  e.target = features.acoustic;
  if (e.mel.rows() != e.base.rows() || e.target.rows() != e.base.rows()) {
    throw DataError(id + ": feature frame counts disagree");
  }
  return e;
}

ConversionResult convert(const Waveform& source, const std::string& utterance_id, const VcModel& model,
                         const PitchStats& source_stats, const PitchStats& target_stats,
                         const PpgProvider& ppg, const FrameSpec& spec, std::optional<InputMode> requested_mode) {
  const VcConfig& cfg = model.config();
  if (requested_mode && *requested_mode != cfg.mode) {
    throw ConfigMismatchError("model was trained in " + std::string(mode_name(cfg.mode)) + " mode, " +
                              std::string(mode_name(*requested_mode)) + " was requested");
  }
  if (ppg.dim() != cfg.d_p) {
    throw ConfigMismatchError("ppg provider gives " + std::to_string(ppg.dim()) + " classes, model expects d_p " +
                              std::to_string(cfg.d_p));
  }
  ConversionResult r;
  const Matrix mel = stft_mel(source, spec);
  r.source_pitch = track_pitch(source, spec);
  r.converted_pitch = convert_f0(r.source_pitch, source_stats, target_stats, spec.sample_rate);
  const Matrix post = ppg.ppg(utterance_id, mel);
  validate_ppg(post, static_cast<int>(mel.rows()));
  if (cfg.mode == InputMode::kProposed) {
    r.prosody = model.reference_encode(mel);
    r.input = assemble_input(post, r.converted_pitch, &r.prosody, cfg.mode);
  } else {
    r.input = assemble_input(post, r.converted_pitch, nullptr, cfg.mode);
  }
  r.acoustic = model.cbhg_forward(r.input);
  return r;
}

}  // namespace pvc
