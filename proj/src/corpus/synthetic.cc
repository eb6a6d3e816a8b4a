#include "pvc/corpus/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "pvc/corpus/wav.h"
#include "pvc/random.h"

namespace pvc {
namespace {

struct PhoneShape {
  bool voiced;
  std::array<double, 3> formants;    // Hz, before speaker scaling
  std::array<double, 3> bandwidths;  // Hz
  double level;
};

// Rough vowel/nasal/fricative targets.
const std::array<PhoneShape, kSyntheticPhones> kPhones = {{
    {false, {0, 0, 0}, {0, 0, 0}, 0.0},
    {true, {730, 1090, 2440}, {80, 90, 120}, 1.0},
    {true, {270, 2290, 3010}, {60, 90, 150}, 0.8},
    {true, {300, 870, 2240}, {60, 80, 120}, 0.8},
    {true, {530, 1840, 2480}, {70, 90, 130}, 0.9},
    {true, {570, 840, 2410}, {70, 80, 120}, 0.9},
    {true, {660, 1720, 2410}, {80, 90, 130}, 1.0},
    {true, {250, 1200, 2300}, {100, 200, 200}, 0.4},
    {true, {350, 1350, 2600}, {90, 150, 200}, 0.6},
    {false, {2600, 4200, 6000}, {600, 900, 1200}, 0.25},
    {false, {1800, 3500, 5200}, {500, 800, 1000}, 0.2},
    {false, {4500, 5800, 7200}, {800, 1000, 1200}, 0.2},
}};

constexpr double kVoicedGain = 1.0;
constexpr double kNoiseGain = 0.15;

class Resonator {
 public:
  float process(double x, double freq, double bw, int sr) {
    const double r = std::exp(-M_PI * bw / sr);
    const double a1 = 2 * r * std::cos(2 * M_PI * freq / sr);
    const double a2 = -r * r;
    // Unit gain at the resonance.
    const std::complex<double> z = std::polar(1.0, -2 * M_PI * freq / sr);
    const double gain = std::abs(1.0 - a1 * z - a2 * z * z);
    const double y = gain * x + a1 * y1_ + a2 * y2_;
    y2_ = y1_;
    y1_ = y;
    return static_cast<float>(y);
  }

 private:
  double y1_ = 0.0, y2_ = 0.0;
};

}  // namespace

SyntheticSpeaker synthetic_speaker_a() { return {"A", 110.0, 0.09, 1.0}; }
SyntheticSpeaker synthetic_speaker_b() { return {"B", 205.0, 0.07, 1.17}; }

SyntheticUtterance synthesize_utterance(const SyntheticSpeaker& speaker, const std::string& id,
                                        uint64_t seed, double seconds, int sample_rate, int hop_samples) {
  Rng rng(seed);
  const auto total = static_cast<size_t>(std::lround(seconds * sample_rate));
  std::vector<int> seg_label;
  std::vector<size_t> seg_end;
  size_t pos = static_cast<size_t>(rng.uniform(0.10, 0.18) * sample_rate);
  seg_label.push_back(0);
  seg_end.push_back(pos);
  const auto tail = static_cast<size_t>(rng.uniform(0.10, 0.18) * sample_rate);
  int prev = 0;
  while (pos + tail < total) {
    int phone;
    do {
      phone = 1 + static_cast<int>(rng.below(kSyntheticPhones - 1));
    } while (phone == prev);
    const double dur = kPhones[phone].voiced ? rng.uniform(0.07, 0.16) : rng.uniform(0.05, 0.10);
    pos = std::min(total - tail, pos + static_cast<size_t>(dur * sample_rate));
    seg_label.push_back(phone);
    seg_end.push_back(pos);
    prev = phone;
  }
  seg_label.push_back(0);
  seg_end.push_back(total);

  const double rate = rng.uniform(1.5, 3.0);
  const double phi = rng.uniform(0.0, 2 * M_PI);
  const double offset = rng.normal() * 0.04;

  SyntheticUtterance out;
  out.id = id;
  out.wave.sample_rate = sample_rate;
  out.wave.samples.resize(total);
  std::array<Resonator, 3> voiced_res, noise_res;
  std::array<double, 3> freq{500, 1500, 2500}, bw{100, 100, 100};
  double voiced_amp = 0.0, noise_amp = 0.0, phase = 0.0;
  // One-pole smoothing of articulatory targets, about 12 ms.
  const double smooth = 1.0 - std::exp(-1.0 / (0.012 * sample_rate));
  size_t seg = 0;
  const int max_harm = 60;
  for (size_t n = 0; n < total; ++n) {
    while (n >= seg_end[seg]) ++seg;
    const PhoneShape& ph = kPhones[seg_label[seg]];
    const bool silent = seg_label[seg] == 0;
    for (int k = 0; k < 3; ++k) {
      if (!silent) {
        const double scale = ph.voiced ? speaker.formant_scale : std::sqrt(speaker.formant_scale);
        freq[k] += smooth * (std::min(ph.formants[k] * scale, 0.45 * sample_rate) - freq[k]);
        bw[k] += smooth * (ph.bandwidths[k] - bw[k]);
      }
    }
    const double v_target = (!silent && ph.voiced) ? ph.level : 0.0;
    const double n_target = (!silent && !ph.voiced) ? ph.level : 0.0;
    voiced_amp += smooth * (v_target - voiced_amp);
    noise_amp += smooth * (n_target - noise_amp);

    const double t = static_cast<double>(n) / sample_rate;
    const double progress = t / seconds;
    const double log_f0 = std::log(speaker.f0_hz) + offset + speaker.f0_spread * (0.9 * std::sin(2 * M_PI * rate * t + phi)) +
                          speaker.f0_spread * 1.2 * (0.5 - progress);
    const double f0 = std::exp(log_f0);
    phase += f0 / sample_rate;
    phase -= std::floor(phase);

    double src = 0.0;
    if (voiced_amp > 1e-4) {
      for (int h = 1; h <= max_harm && h * f0 < 0.45 * sample_rate; ++h) {
        src += std::sin(2 * M_PI * h * phase) / h;
      }
      src *= voiced_amp;
    }
    const double noise = rng.normal();
    double v = src, u = noise * noise_amp;
    for (int k = 0; k < 3; ++k) {
      v = voiced_res[k].process(v, freq[k], bw[k], sample_rate);
      u = noise_res[k].process(u, freq[k], bw[k], sample_rate);
    }
    const double y = kVoicedGain * v + kNoiseGain * u + 1e-4 * noise;
    out.wave.samples[n] = static_cast<float>(y);
  }
  float peak = 0.0f;
  for (float s : out.wave.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0f) {
    for (auto& s : out.wave.samples) s *= 0.5f / peak;
  }

  const size_t frames = total / static_cast<size_t>(hop_samples) + 1;
  out.labels.resize(frames);
  seg = 0;
  for (size_t f = 0; f < frames; ++f) {
    const size_t at = std::min(f * hop_samples, total - 1);
    while (at >= seg_end[seg]) ++seg;
    out.labels[f] = seg_label[seg];
  }
  return out;
}

std::vector<Manifest> write_synthetic_corpus(const std::filesystem::path& dir,
                                             const std::vector<SyntheticSpeaker>& speakers,
                                             int utterances_per_speaker, uint64_t seed, double seconds) {
  std::filesystem::create_directories(dir);
  std::vector<Manifest> manifests;
  Rng root(seed);
  for (size_t s = 0; s < speakers.size(); ++s) {
    Manifest m;
    for (int i = 0; i < utterances_per_speaker; ++i) {
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%03d", speakers[s].name.c_str(), i);
      const uint64_t useed = root.fork(s * 100003 + static_cast<uint64_t>(i)).next();
      // Vary the length a little so batches carry padding.
      const double len = seconds * (0.85 + 0.3 * Rng(useed ^ 0x5eedULL).uniform());
      SyntheticUtterance u = synthesize_utterance(speakers[s], id, useed, len);
      const auto wav = dir / (u.id + ".wav");
      save_wav(wav, u.wave);
      std::ofstream lab(dir / (u.id + ".lab"));
      for (int l : u.labels) lab << l << '\n';
      m.entries.push_back({u.id, speakers[s].name, wav, u.wave.duration_s(), 1.0});
    }
    // Paths in the file are relative to the manifest's directory.
    Manifest on_disk = m;
    for (auto& u : on_disk.entries) u.audio_path = u.audio_path.filename();
    save_manifest(dir / (speakers[s].name + ".manifest"), on_disk);
    manifests.push_back(std::move(m));
  }
  return manifests;
}

}  // namespace pvc
