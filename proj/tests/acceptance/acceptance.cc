// Acceptance run: one PASS/FAIL line per criterion. Arguments select
// criteria by number; no arguments runs all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/signals.h"
#include "pvc/augment/speed_perturb.h"
#include "pvc/cli/commands.h"
#include "pvc/cli/run_config.h"
#include "pvc/corpus/synthetic.h"
#include "pvc/corpus/wav.h"
#include "pvc/dsp/acoustic.h"
#include "pvc/dsp/lpc.h"
#include "pvc/dsp/pitch.h"
#include "pvc/dsp/spectral.h"
#include "pvc/models/convert.h"
#include "pvc/models/trainer.h"
#include "pvc/models/vc_model.h"
#include "pvc/pitchstats/pitch_stats.h"
#include "pvc/ppg/ppg.h"
#include "pvc/vocoder/vocoder.h"

using namespace pvc;
namespace fs = std::filesystem;
namespace sig = pvc::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a named check; the detail line lists every check.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (detail.tellp() > 0) detail << "; ";
    detail << what << (ok ? "" : " [failed]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

PitchTrack track_from_f0(const std::vector<double>& f0, int sr = 16000) {
  PitchTrack p;
  for (double f : f0) {
    p.f0_hz.push_back(static_cast<float>(f));
    p.vuv.push_back(f > 0 ? 1.0f : 0.0f);
    p.period_samples.push_back(f > 0 ? static_cast<float>(sr / f) : 0.0f);
    p.correlation.push_back(f > 0 ? 0.9f : 0.1f);
  }
  return p;
}

// Voiced log-f0 mean and population std, computed here rather than by
// estimate_stats.
std::pair<double, double> log_f0_moments(const std::vector<PitchTrack>& tracks) {
  double sum = 0.0, sq = 0.0;
  int64_t n = 0;
  for (const auto& p : tracks) {
    for (int t = 0; t < p.frames(); ++t) {
      if (p.vuv[t] == 0.0f) continue;
      const double l = std::log(static_cast<double>(p.f0_hz[t]));
      sum += l;
      sq += l * l;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  return {mean, std::sqrt(std::max(0.0, sq / static_cast<double>(n) - mean * mean))};
}

// Intonation-like contours: a declining line plus two sinusoids, with
// unvoiced gaps.
std::vector<PitchTrack> synthetic_pitch_data(double center_hz, double depth, int utterances, uint64_t seed) {
  Rng rng(seed);
  std::vector<PitchTrack> out;
  for (int u = 0; u < utterances; ++u) {
    const double base = std::log(center_hz) + rng.normal() * depth * 0.3;
    const double rate = rng.uniform(0.5, 2.0);
    std::vector<double> f0;
    for (int t = 0; t < 200; ++t) {
      if ((t / 17) % 4 == 3) {
        f0.push_back(0.0);
        continue;
      }
      const double s = t / 100.0;
      const double l = base + depth * (0.8 * std::sin(2 * M_PI * rate * s) + 0.5 * std::sin(2 * M_PI * 3.1 * s + u) -
                                       0.6 * (s - 1.0));
      f0.push_back(std::exp(l));
    }
    out.push_back(track_from_f0(f0));
  }
  return out;
}

double median_voiced_f0(const Waveform& w) {
  const PitchTrack p = track_pitch(w, FrameSpec{});
  std::vector<double> f0;
  for (int t = 0; t < p.frames(); ++t)
    if (p.vuv[t] > 0) f0.push_back(p.f0_hz[t]);
  return median(f0);
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), static_cast<size_t>(a.size()) * sizeof(float)) == 0;
}

// Two speaker-A utterances with toy PPGs from a classifier fitted to them.
struct SmallSet {
  std::vector<UtteranceFeatures> feats;
  std::shared_ptr<PpgClassifier> classifier;
  std::vector<VcExample> examples() const {
    std::vector<VcExample> ex;
    for (size_t i = 0; i < feats.size(); ++i) {
      ex.push_back(make_example("a" + std::to_string(i), feats[i], classifier->posteriors(feats[i].mel)));
    }
    return ex;
  }
};

SmallSet two_utterances() {
  FrameSpec spec;
  SmallSet s;
  std::vector<LabeledUtterance> lab;
  for (int i = 0; i < 2; ++i) {
    const auto u = synthesize_utterance(synthetic_speaker_a(), "a" + std::to_string(i), 100 + i, 1.5);
    s.feats.push_back(extract_features(u.wave, spec));
    lab.push_back({s.feats.back().mel, u.labels});
  }
  s.classifier = std::make_shared<PpgClassifier>(ClassifierConfig{}, 1);
  train_toy_classifier(*s.classifier, lab, {});
  return s;
}

Outcome dimension_fidelity() {
  Outcome o;
  FrameSpec spec;
  const int d_p = kExternalPpgDim;
  o.check(input_dim(InputMode::kBaseline, d_p, 1) == 514, "baseline width formula 514");
  o.check(input_dim(InputMode::kProposed, d_p, 1) == 515, "proposed width formula 515");

  const auto u = synthesize_utterance(synthetic_speaker_b(), "dims", 3, 1.0);
  const UtteranceFeatures f = extract_features(u.wave, spec);
  const int frames = static_cast<int>(f.mel.rows());
  const Matrix ppg = Matrix::Constant(frames, d_p, 1.0f / d_p);

  VcConfig cfg;
  cfg.d_p = d_p;
  cfg.mode = InputMode::kProposed;
  VcModel model(cfg, 1);
  const Matrix prosody = model.reference_encode(f.mel);
  const Matrix base = assemble_input(ppg, f.pitch, nullptr, InputMode::kBaseline);
  const Matrix full = assemble_input(ppg, f.pitch, &prosody, InputMode::kProposed);
  const Matrix out = model.cbhg_forward(full);
  const Matrix bf = bfcc(u.wave, spec);

  o.check(base.cols() == 514, "baseline input " + std::to_string(base.cols()));
  o.check(full.cols() == 515, "proposed input " + std::to_string(full.cols()));
  o.check(prosody.cols() == 1, "prosody " + std::to_string(prosody.cols()));
  o.check(out.cols() == 32 && out.rows() == frames, "output " + std::to_string(out.cols()));
  o.check(model.predict(base, f.mel).cols() == 32, "predict 32");
  o.check(f.mel.cols() == 80, "mel " + std::to_string(f.mel.cols()));
  o.check(bf.cols() == 30, "bfcc " + std::to_string(bf.cols()));
  o.check(f.acoustic.cols() == 32, "acoustic " + std::to_string(f.acoustic.cols()));
  return o;
}

Outcome log_f0_transform() {
  Outcome o;
  Rng rng(5);

  std::vector<double> f0;
  for (int i = 0; i < 2000; ++i) f0.push_back(rng.uniform() < 0.3 ? 0.0 : rng.uniform(60, 500));
  const PitchTrack in = track_from_f0(f0);
  bool identity = true;
  for (int trial = 0; trial < 20; ++trial) {
    const PitchStats s{rng.uniform(4.3, 5.6), rng.uniform(0.05, 0.4), 500};
    const PitchTrack out = convert_f0(in, s, s, 16000);
    identity = identity && out.f0_hz == in.f0_hz && out.vuv == in.vuv;
  }
  o.check(identity, "identity stats exact");

  bool mean_to_mean = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const PitchStats src{rng.uniform(4.0, 6.0), rng.uniform(0.02, 0.5), 100};
    const PitchStats tgt{rng.uniform(4.0, 6.0), rng.uniform(0.02, 0.5), 100};
    mean_to_mean = mean_to_mean && convert_log_f0(src.mu, src, tgt) == tgt.mu;
  }
  o.check(mean_to_mean, "mean maps to mean exactly");

  const auto source = synthetic_pitch_data(210.0, 0.15, 6, 11);
  const auto target = synthetic_pitch_data(110.0, 0.08, 6, 12);
  const PitchStats src = estimate_stats(source), tgt = estimate_stats(target);
  std::vector<PitchTrack> converted;
  for (const auto& p : source) converted.push_back(convert_f0(p, src, tgt, 16000));
  const auto [mean, std_dev] = log_f0_moments(converted);
  int64_t voiced = 0;
  for (const auto& p : converted) voiced += p.voiced_frames();
  o.check(voiced >= 500, std::to_string(voiced) + " voiced frames");
  o.check(std::abs(mean - tgt.mu) < 0.05, "mean offset " + fmt("%.2e", mean - tgt.mu));
  o.check(std::abs(std_dev / tgt.sigma - 1.0) < 0.10, "std ratio " + fmt("%.4f", std_dev / tgt.sigma));
  return o;
}

Outcome dsp_oracles() {
  Outcome o;
  Rng rng(21);

  double residual = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(2048);
    for (auto& v : x) v = rng.normal();
    for (size_t i = x.size() - 1; i >= 2; --i) x[i] += 0.7 * x[i - 1] - 0.2 * x[i - 2];
    const auto r = sig::autocorr(x, kLpcOrder);
    const LpcCoefficients lpc = levinson_durbin(r, kLpcOrder);
    for (int i = 0; i < kLpcOrder; ++i) {
      double lhs = 0.0;
      for (int j = 0; j < kLpcOrder; ++j) lhs += r[std::abs(i - j)] * lpc.coeffs[j];
      residual = std::max(residual, std::abs(lhs - r[i + 1]));
    }
  }
  o.check(residual < 1e-8, "normal-equation residual " + fmt("%.1e", residual));

  double ar1 = 0.0;
  for (double rho : {-0.95, -0.5, 0.3, 0.9, 0.99}) {
    std::vector<double> r(kLpcOrder + 1);
    for (int k = 0; k <= kLpcOrder; ++k) r[k] = std::pow(rho, k);
    const LpcCoefficients lpc = levinson_durbin(r, kLpcOrder);
    ar1 = std::max(ar1, std::abs(lpc.coeffs[0] - rho));
    for (int k = 1; k < kLpcOrder; ++k) ar1 = std::max(ar1, std::abs(lpc.coeffs[k]));
    ar1 = std::max(ar1, std::abs(lpc.residual_error - (1 - rho * rho)));
  }
  o.check(ar1 < 1e-6, "AR(1) recovery " + fmt("%.1e", ar1));

  double dct = 0.0;
  for (int n : {30, 80, 257}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(static_cast<size_t>(n));
      for (auto& v : x) v = rng.normal() * 10.0;
      const auto y = idct_ortho(dct_ortho(x));
      for (int i = 0; i < n; ++i) dct = std::max(dct, std::abs(y[i] - x[i]));
    }
  }
  o.check(dct < 1e-5, "DCT round trip " + fmt("%.1e", dct));

  FrameSpec spec;
  int voiced = 0, within = 0, octave = 0, frames = 0;
  for (auto [lo, hi] : {std::pair{80.0, 300.0}, std::pair{300.0, 80.0}}) {
    const double dur = 2.0;
    auto f0_at = [&](double t) { return lo * std::pow(hi / lo, t / dur); };
    const PitchTrack p = track_pitch(sig::harmonic(f0_at, dur), spec);
    for (int t = 2; t < p.frames() - 2; ++t) {
      ++frames;
      if (p.vuv[t] == 0.0f) continue;
      ++voiced;
      const double truth = f0_at(t * spec.hop_s);
      if (std::abs(p.f0_hz[t] - truth) <= 3.0) ++within;
      const double ratio = p.f0_hz[t] / truth;
      if (ratio > 1.8 || ratio < 0.55) ++octave;
    }
  }
  o.check(voiced >= 0.9 * frames, "sweep voiced " + std::to_string(voiced) + "/" + std::to_string(frames));
  o.check(within >= 0.9 * voiced, "within 3 Hz " + fmt("%.3f", static_cast<double>(within) / voiced));
  o.check(octave <= 0.1 * voiced, "octave errors " + fmt("%.3f", static_cast<double>(octave) / voiced));
  return o;
}

Outcome augmentation() {
  Outcome o;
  Waveform voice = sig::harmonic([](double t) { return 150.0 + 20.0 * std::sin(2 * M_PI * 1.5 * t); }, 2.0);
  for (size_t i = 0; i < voice.samples.size(); ++i) {
    voice.samples[i] *= static_cast<float>(0.6 + 0.4 * std::sin(2 * M_PI * 2.0 * i / 16000.0));
  }
  const Waveform speech = synthesize_utterance(synthetic_speaker_a(), "aug", 44, 2.0).wave;

  for (const Waveform* w : std::vector<const Waveform*>{&voice, &speech}) {
    const Waveform same = time_stretch(*w, 1.0);
    o.check(same.samples == w->samples && same.sample_rate == w->sample_rate, "factor 1.0 identity");
    const double f0_in = median_voiced_f0(*w);
    double worst_dur = 0.0, worst_f0 = 0.0;
    for (double factor : {0.4, 0.6, 0.8, 1.2}) {
      const Waveform out = time_stretch(*w, factor);
      worst_dur = std::max(worst_dur, std::abs(out.duration_s() * factor / w->duration_s() - 1.0));
      worst_f0 = std::max(worst_f0, std::abs(median_voiced_f0(out) - f0_in) / f0_in);
    }
    o.check(worst_dur <= 0.02, "duration ratio error " + fmt("%.4f", worst_dur));
    o.check(worst_f0 < 0.05, "median f0 drift " + fmt("%.4f", worst_f0));
  }
  return o;
}

Outcome copy_synthesis() {
  Outcome o;
  FrameSpec spec;
  std::vector<double> f0_err, all_err;
  std::vector<std::vector<double>> band_err(kBarkBands);
  for (int i = 0; i < 5; ++i) {
    const auto speaker = i % 2 ? synthetic_speaker_b() : synthetic_speaker_a();
    const auto utt = synthesize_utterance(speaker, "copy", 900 + i, 1.5);
    Waveform y = synthesize(extract_acoustic(utt.wave, spec), spec);
    y.samples.resize(utt.wave.samples.size());

    const PitchTrack p0 = track_pitch(utt.wave, spec), p1 = track_pitch(y, spec);
    for (int t = 0; t < std::min(p0.frames(), p1.frames()); ++t) {
      if (p0.vuv[t] > 0 && p1.vuv[t] > 0) f0_err.push_back(std::abs(p0.f0_hz[t] - p1.f0_hz[t]));
    }

    // Speech frames, mean level difference removed (the output is
    // peak-normalised).
    const Matrix b0 = bark_log_energies(utt.wave, spec), b1 = bark_log_energies(y, spec);
    std::vector<int> frames;
    for (int t = 0; t < std::min<int>(b0.rows(), static_cast<int>(utt.labels.size())); ++t) {
      if (utt.labels[t] != 0) frames.push_back(t);
    }
    double offset = 0.0;
    for (int t : frames) offset += (b1.row(t) - b0.row(t)).cast<double>().sum();
    offset /= static_cast<double>(frames.size()) * kBarkBands;
    for (int t : frames) {
      for (int m = 0; m < kBarkBands; ++m) {
        const double db = 10.0 / std::log(10.0) * std::abs(b1(t, m) - b0(t, m) - offset);
        band_err[m].push_back(db);
        all_err.push_back(db);
      }
    }
  }
  o.check(median(f0_err) < 10.0, "median f0 error " + fmt("%.2f Hz", median(f0_err)));
  o.check(median(all_err) < 3.0, "median envelope error " + fmt("%.2f dB", median(all_err)));
  int worst = 0;
  for (int m = 1; m < kBarkBands; ++m)
    if (median(band_err[m]) > median(band_err[worst])) worst = m;
  o.detail << "; worst band " << worst << " median " << fmt("%.2f dB", median(band_err[worst])) << " (reported)";
  return o;
}

Outcome overfit() {
  Outcome o;
  const SmallSet set = two_utterances();
  double final_loss[2] = {0.0, 0.0};
  for (auto mode : {InputMode::kProposed, InputMode::kBaseline}) {
    VcConfig cfg;
    cfg.mode = mode;
    VcModel model(cfg, 7);
    TrainConfig tc;
    tc.max_steps = 2000;
    tc.batch_size = 2;
    Trainer trainer(model, set.examples(), tc);
    const double initial = trainer.evaluate();
    const auto steps = trainer.run();
    const double final = trainer.evaluate();
    final_loss[mode == InputMode::kProposed ? 0 : 1] = final;
    const std::string name(mode_name(mode));
    o.detail << (o.detail.tellp() > 0 ? "; " : "") << name << " " << fmt("%.4f", initial) << " -> "
             << fmt("%.4f", final) << " (last step " << fmt("%.4f", steps.back().loss) << ")";
    if (mode == InputMode::kProposed) {
      o.check(final < 0.2 * initial, "proposed ratio " + fmt("%.3f", final / initial));
    }
  }
  o.check(final_loss[0] <= final_loss[1], "proposed <= baseline");
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = sig::scratch_dir("acceptance_determinism");
  const SmallSet set = two_utterances();
  TrainConfig tc;
  tc.max_steps = 100;
  tc.batch_size = 2;
  double loss[2];
  for (int run = 0; run < 2; ++run) {
    VcModel model(VcConfig{}, 7);
    Trainer trainer(model, set.examples(), tc);
    loss[run] = trainer.run().back().loss;
    trainer.save(dir / ("run" + std::to_string(run) + ".ckpt"));
  }
  o.check(loss[0] == loss[1], "step-100 loss " + fmt("%.9g", loss[0]) + " vs " + fmt("%.9g", loss[1]));

  FrameSpec spec;
  const Waveform src = synthesize_utterance(synthetic_speaker_b(), "det", 31, 1.5).wave;
  const PitchStats stats_src = estimate_stats(std::vector<PitchTrack>{track_pitch(src, spec)});
  const PitchStats stats_tgt{std::log(110.0), 0.08, 1000};
  const ToyPpgProvider ppg(set.classifier);
  std::vector<Matrix> features;
  std::vector<Waveform> waves;
  for (const char* name : {"run0.ckpt", "run0.ckpt", "run1.ckpt"}) {
    const LoadedModel m = load_vc_checkpoint(dir / name);
    features.push_back(convert(src, "det", m.model, stats_src, stats_tgt, ppg, spec).acoustic);
    waves.push_back(synthesize(features.back(), spec));
  }
  o.check(same_bits(features[0], features[1]) && same_bits(waves[0].samples, waves[1].samples),
          "same checkpoint bit-identical");
  o.check(same_bits(features[0], features[2]) && same_bits(waves[0].samples, waves[2].samples),
          "second run bit-identical");
  fs::remove_all(dir);
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const fs::path root = sig::scratch_dir("acceptance_e2e");
  std::ostringstream log;
  RunConfig config;
  config.cache_dir = root / "cache";
  config.out_dir = root / "out";
  config.ppg_checkpoint = root / "out" / "ppg.ckpt";
  config.train.batch_size = 4;
  config.train.max_steps = 1500;
  config.train.checkpoint_every = 0;

  cmd_make_corpus(root / "corpus", 8, 1.5, config.seed, log);
  const fs::path a = root / "corpus" / "A.manifest", b = root / "corpus" / "B.manifest";
  ExtractSummary ea = cmd_extract(config, a, log), eb = cmd_extract(config, b, log);
  o.check(ea.failures.empty() && eb.failures.empty(), "extract");
  cmd_train_ppg(config, {a, b}, log);
  const TrainSummary ts = cmd_train_vc(config, a, std::nullopt, log);
  const PitchStats stats_a = cmd_stats(config, a, root / "out" / "A.stats", log);
  cmd_stats(config, b, root / "out" / "B.stats", log);
  o.detail << "; train " << fmt("%.4f", ts.initial_loss) << " -> " << fmt("%.4f", ts.final_loss);

  const Waveform source = synthesize_utterance(synthetic_speaker_b(), "b_src", 4242, 2.0).wave;
  save_wav(root / "b_src.wav", source);
  ConvertRequest req;
  req.input = root / "b_src.wav";
  req.output = root / "conv" / "b_src.wav";
  req.checkpoint = ts.checkpoint;
  req.target_stats = root / "out" / "A.stats";
  req.source_stats = root / "out" / "B.stats";
  cmd_convert(config, req, log);

  const Waveform out = load_wav(req.output);
  bool finite = true;
  for (float s : out.samples) finite = finite && std::isfinite(s) && std::abs(s) <= 1.0f;
  o.check(out.sample_rate == source.sample_rate && finite, "playable wav");
  const long diff = static_cast<long>(out.samples.size()) - static_cast<long>(source.samples.size());
  o.check(std::abs(diff) <= config.frame.hop_samples(), "length diff " + std::to_string(diff) + " samples");

  const auto [mean, std_dev] = log_f0_moments({track_pitch(out, config.frame)});
  const auto [src_mean, src_std] = log_f0_moments({track_pitch(source, config.frame)});
  o.detail << "; source log-f0 " << fmt("%.3f", src_mean);
  o.check(std::abs(mean - stats_a.mu) < 0.1,
          "converted log-f0 " + fmt("%.3f", mean) + " vs A " + fmt("%.3f", stats_a.mu));
  fs::remove_all(root);
  return o;
}

Outcome streaming() {
  Outcome o;
  FrameSpec spec;
  const auto utt = synthesize_utterance(synthetic_speaker_a(), "stream", 77, 3.0);
  const Matrix features = extract_acoustic(utt.wave, spec);
  VocoderConfig cfg;
  cfg.peak = 0.0;  // batch output is otherwise rescaled after the fact
  const Waveform batch = synthesize(features, spec, cfg);

  // Frames delivered one at a time from separate buffers, as a model would
  // emit them.
  std::vector<float> streamed;
  StreamSynthesizer synth(spec, cfg);
  const auto sink = [&](std::span<const float> block) { streamed.insert(streamed.end(), block.begin(), block.end()); };
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    const std::vector<float> frame(features.row(t).data(), features.row(t).data() + kAcousticDim);
    synth.push(t, frame, sink);
  }
  synth.finish(sink);
  o.check(same_bits(streamed, batch.samples), "streamed == batch, " + std::to_string(streamed.size()) + " samples");

  const RtfReport r = benchmark_streaming(features, spec, 20);
  o.detail << "; RTF " << fmt("%.4f", r.rtf()) << " (reported)";
  return o;
}

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "dimension fidelity", dimension_fidelity},
      {2, "log-f0 transform", log_f0_transform},
      {3, "dsp oracles", dsp_oracles},
      {4, "augmentation", augmentation},
      {5, "copy synthesis", copy_synthesis},
      {6, "overfit training", overfit},
      {7, "determinism", determinism},
      {8, "end-to-end conversion", end_to_end},
      {9, "streaming vocoder", streaming},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
      Outcome o = c.run();
      pass = o.pass;
      detail = o.detail.str();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s (%.1f s): %s\n", pass ? "PASS" : "FAIL", c.number, c.name, secs, detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
