#include "pvc/cli/commands.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pvc/augment/speed_perturb.h"
#include "pvc/corpus/feature_cache.h"
#include "pvc/corpus/synthetic.h"
#include "pvc/corpus/wav.h"
#include "pvc/hash.h"
#include "pvc/models/convert.h"
#include "pvc/models/trainer.h"
#include "pvc/pitchstats/pitch_stats.h"
#include "pvc/vocoder/vocoder.h"

namespace fs = std::filesystem;

namespace pvc {
namespace {

constexpr FeatureKind kAcousticKinds[] = {FeatureKind::kMel, FeatureKind::kBfccAcoustic, FeatureKind::kF0Vuv};

Waveform load_source(const Utterance& u, const FrameSpec& spec) {
  Waveform w = load_wav(u.audio_path);
  if (w.sample_rate != spec.sample_rate) {
    throw DataError(u.audio_path.string() + ": sample rate " + std::to_string(w.sample_rate) + ", config expects " +
                    std::to_string(spec.sample_rate));
  }
  if (u.speed != 1.0) w = time_stretch(w, u.speed);
  return w;
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return std::to_string(fnv1a64(ss.str()));
}

// PPG records live in their own cache, stamped with the PPG source as well
// as the frame settings.
FeatureCache ppg_cache(const RunConfig& config) {
  std::string identity = config.ppg_source == PpgSource::kToy ? "toy;" + file_digest(config.ppg_checkpoint)
                                                              : "external;" + config.ppg_dir.string();
  return FeatureCache(config.cache_dir / "ppg", fnv1a64(identity, config.extraction_hash()));
}

bool ppg_available(const RunConfig& config) {
  return config.ppg_source == PpgSource::kExternal || fs::exists(config.ppg_checkpoint);
}

Manifest expanded(const RunConfig& config, const fs::path& manifest) {
  return expand_manifest(load_manifest(manifest), config.speed_factors);
}

std::vector<Utterance> originals(const Manifest& m) {
  std::vector<Utterance> out;
  for (const auto& u : m.entries) {
    if (u.speed == 1.0) out.push_back(u);
  }
  return out;
}

}  // namespace

std::unique_ptr<PpgProvider> make_ppg_provider(const RunConfig& config) {
  if (config.ppg_source == PpgSource::kExternal) {
    if (!fs::is_directory(config.ppg_dir)) throw DataError("ppg directory not found: " + config.ppg_dir.string());
    return std::make_unique<ExternalPpgProvider>(config.ppg_dir, config.model.d_p);
  }
  if (!fs::exists(config.ppg_checkpoint)) {
    throw DataError("ppg classifier checkpoint not found: " + config.ppg_checkpoint.string() +
                    " (run 'train --stage ppg' first)");
  }
  auto classifier = std::make_shared<const PpgClassifier>(PpgClassifier::load(config.ppg_checkpoint));
  if (classifier->config().d_p != config.model.d_p) {
    throw ConfigMismatchError("ppg classifier has " + std::to_string(classifier->config().d_p) +
                              " classes, model.d_p is " + std::to_string(config.model.d_p));
  }
  return std::make_unique<ToyPpgProvider>(std::move(classifier));
}

void cmd_make_corpus(const fs::path& out_dir, int utterances_per_speaker, double seconds, uint64_t seed,
                     std::ostream& log) {
  if (utterances_per_speaker < 1) throw UsageError("make-corpus needs at least one utterance per speaker");
  if (!(seconds >= 0.5)) throw UsageError("make-corpus needs utterances of at least 0.5 s");
  const auto manifests =
      write_synthetic_corpus(out_dir, {synthetic_speaker_a(), synthetic_speaker_b()}, utterances_per_speaker, seed, seconds);
  for (const auto& m : manifests) {
    log << "wrote " << m.entries.size() << " utterances for speaker " << m.entries.front().speaker << "\n";
  }
}

ExtractSummary cmd_extract(const RunConfig& config, const fs::path& manifest, std::ostream& log) {
  const Manifest m = expanded(config, manifest);
  const FeatureCache cache(config.cache_dir, config.extraction_hash());
  std::unique_ptr<PpgProvider> provider;
  std::optional<FeatureCache> ppgs;
  if (ppg_available(config)) {
    provider = make_ppg_provider(config);
    ppgs.emplace(ppg_cache(config));
  }

  ExtractSummary summary;
  for (const auto& u : m.entries) {
    bool valid = true;
    for (FeatureKind k : kAcousticKinds) valid = valid && cache.contains_valid(u.id, k);
    if (ppgs) valid = valid && ppgs->contains_valid(u.id, FeatureKind::kPpg);
    if (valid) {
      ++summary.skipped;
      continue;
    }
    try {
      const Waveform w = load_source(u, config.frame);
      const UtteranceFeatures f = extract_features(w, config.frame);
      cache.put({u.id, FeatureKind::kMel, f.mel});
      cache.put({u.id, FeatureKind::kBfccAcoustic, f.acoustic});
      cache.put({u.id, FeatureKind::kF0Vuv, f.pitch.to_matrix()});
      if (ppgs) ppgs->put({u.id, FeatureKind::kPpg, provider->ppg(u.id, f.mel)});
      ++summary.computed;
    } catch (const DataError& e) {
      summary.failures.push_back(u.id + ": " + e.what());
      log << "error: " << summary.failures.back() << "\n";
    }
  }
  log << "extract: " << summary.computed << " computed, " << summary.skipped << " already cached, "
      << summary.failures.size() << " failed\n";
  return summary;
}

Manifest cmd_augment(const RunConfig& config, const fs::path& manifest, const fs::path& out_dir, std::ostream& log) {
  const Manifest m = expanded(config, manifest);
  fs::create_directories(out_dir);
  Manifest out;
  out.split = m.split;
  for (const auto& u : m.entries) {
    if (u.speed == 1.0) {
      out.entries.push_back(u);
      continue;
    }
    const Waveform w = load_source(u, config.frame);
    Utterance a = u;
    a.audio_path = fs::absolute(out_dir / (u.id + ".wav"));
    a.duration_s = w.duration_s();
    a.speed = 1.0;
    save_wav(a.audio_path, w);
    out.entries.push_back(std::move(a));
  }
  for (auto& u : out.entries) u.audio_path = fs::absolute(u.audio_path);
  save_manifest(out_dir / "augmented.manifest", out);
  log << "augment: " << out.entries.size() << " entries written to " << (out_dir / "augmented.manifest").string()
      << "\n";
  return out;
}

void cmd_train_ppg(const RunConfig& config, const std::vector<fs::path>& manifests, std::ostream& log) {
  const FeatureCache cache(config.cache_dir, config.extraction_hash());
  std::vector<LabeledUtterance> data;
  for (const auto& path : manifests) {
    for (const auto& u : originals(load_manifest(path))) {
      fs::path lab = u.audio_path;
      lab.replace_extension(".lab");
      if (!fs::exists(lab)) throw DataError("frame labels not found: " + lab.string());
      data.push_back({cache.get(u.id, FeatureKind::kMel).data, read_labels(lab)});
    }
  }
  PpgClassifier classifier(config.classifier_config(), config.seed);
  ClassifierTrainConfig tc = config.ppg_train;
  tc.seed = config.seed;
  const auto result = train_toy_classifier(classifier, data, tc);
  double acc = 0.0;
  for (const auto& d : data) acc += frame_accuracy(classifier, d) / static_cast<double>(data.size());
  fs::create_directories(config.ppg_checkpoint.parent_path().empty() ? fs::path(".")
                                                                      : config.ppg_checkpoint.parent_path());
  classifier.save(config.ppg_checkpoint);
  log << "ppg: " << data.size() << " utterances, final loss " << result.losses.back() << ", frame accuracy " << acc
      << ", saved " << config.ppg_checkpoint.string() << "\n";
}

TrainSummary cmd_train_vc(const RunConfig& config, const fs::path& manifest, const std::optional<fs::path>& resume,
                          std::ostream& log) {
  const Manifest m = expanded(config, manifest);
  const FeatureCache cache(config.cache_dir, config.extraction_hash());
  const auto provider = make_ppg_provider(config);
  const FeatureCache ppgs = ppg_cache(config);

  std::vector<VcExample> examples;
  for (const auto& u : m.entries) {
    UtteranceFeatures f;
    f.mel = cache.get(u.id, FeatureKind::kMel).data;
    f.acoustic = cache.get(u.id, FeatureKind::kBfccAcoustic).data;
    f.pitch = PitchTrack::from_matrix(cache.get(u.id, FeatureKind::kF0Vuv).data);
    const Matrix post = ppgs.contains_valid(u.id, FeatureKind::kPpg) ? ppgs.get(u.id, FeatureKind::kPpg).data
                                                                     : provider->ppg(u.id, f.mel);
    validate_ppg(post, static_cast<int>(f.mel.rows()));
    examples.push_back(make_example(u.id, f, post));
  }

  VcModel model(config.model, config.seed);
  Trainer trainer(model, std::move(examples), config.train);
  if (resume) trainer.resume(*resume);
  fs::create_directories(config.out_dir);
  std::ofstream loss_log(config.out_dir / "loss.log", resume ? std::ios::app : std::ios::trunc);
  if (!loss_log) throw DataError("cannot write " + (config.out_dir / "loss.log").string());

  TrainSummary summary;
  const auto results = trainer.run(&loss_log, config.train.checkpoint_every > 0 ? config.out_dir / "checkpoints" : fs::path{},
                                   [&](const StepResult& r) {
                                     if (r.step % 100 == 0) log << "step " << r.step << " loss " << r.loss << "\n";
                                   });
  if (!results.empty()) {
    summary.initial_loss = results.front().loss;
    summary.final_loss = results.back().loss;
  }
  summary.checkpoint = config.out_dir / "vc.ckpt";
  trainer.save(summary.checkpoint);
  log << "train: " << results.size() << " steps, loss " << summary.initial_loss << " -> " << summary.final_loss
      << ", saved " << summary.checkpoint.string() << "\n";
  return summary;
}

PitchStats cmd_stats(const RunConfig& config, const fs::path& manifest, const fs::path& out, std::ostream& log) {
  std::vector<PitchTrack> tracks;
  for (const auto& u : originals(load_manifest(manifest))) tracks.push_back(track_pitch(load_source(u, config.frame), config.frame));
  const PitchStats stats = estimate_stats(tracks);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_stats(out, stats);
  log << "stats: mu " << stats.mu << " sigma " << stats.sigma << " over " << stats.n_frames << " voiced frames\n";
  return stats;
}

Waveform cmd_convert(const RunConfig& config, const ConvertRequest& request, std::ostream& log) {
  if (!fs::exists(request.checkpoint)) throw DataError("checkpoint not found: " + request.checkpoint.string());
  if (!fs::exists(request.target_stats)) throw DataError("target stats not found: " + request.target_stats.string());
  if (!request.source_stats.empty() && !fs::exists(request.source_stats)) {
    throw DataError("source stats not found: " + request.source_stats.string());
  }
  const Waveform source = load_wav(request.input);
  if (source.sample_rate != config.frame.sample_rate) {
    throw DataError(request.input.string() + ": sample rate " + std::to_string(source.sample_rate) +
                    ", config expects " + std::to_string(config.frame.sample_rate));
  }
  const LoadedModel loaded = load_vc_checkpoint(request.checkpoint, request.mode);
  const PitchStats target = load_stats(request.target_stats);
  const PitchStats src = request.source_stats.empty()
                             ? estimate_stats(std::vector<PitchTrack>{track_pitch(source, config.frame)})
                             : load_stats(request.source_stats);
  const auto provider = make_ppg_provider(config);
  const ConversionResult r =
      convert(source, request.input.stem().string(), loaded.model, src, target, *provider, config.frame);
  Waveform out = synthesize(r.acoustic, config.frame, config.vocoder);
  out.samples.resize(source.samples.size(), 0.0f);
  if (request.output.has_parent_path()) fs::create_directories(request.output.parent_path());
  save_wav(request.output, out);
  log << "convert: " << r.acoustic.rows() << " frames, " << out.duration_s() << " s written to "
      << request.output.string() << "\n";
  return out;
}

EvalReport cmd_eval(const RunConfig& config, const fs::path& run_dir, bool check, const fs::path& loss_log,
                    std::ostream& log) {
  ReportOptions opts;
  opts.spec = config.frame;
  opts.check = false;
  opts.thresholds = config.thresholds;
  opts.loss_log = loss_log;
  EvalReport report = run_report(run_dir, opts);
  log << format_report_table(report);
  if (check) check_thresholds(report.aggregate, config.thresholds);
  return report;
}

}  // namespace pvc
