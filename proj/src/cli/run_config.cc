#include "pvc/cli/run_config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "pvc/hash.h"
#include "pvc/models/features.h"

namespace fs = std::filesystem;

namespace pvc {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw UsageError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

int64_t parse_int(const std::string& key, const std::string& v) {
  int64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw UsageError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

uint64_t parse_uint(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  int base = 10;
  std::string digits = v;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    base = 16;
    digits = v.substr(2);
  }
  const auto r = std::from_chars(digits.data(), digits.data() + digits.size(), out, base);
  if (r.ec != std::errc() || r.ptr != digits.data() + digits.size()) {
    throw UsageError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::optional<double> parse_optional(const std::string& key, const std::string& v) {
  if (v.empty() || v == "none") return std::nullopt;
  return parse_double(key, v);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "none"; }

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw UsageError("config key '" + key + "': empty list");
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + format_double(x);
  return out;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define PVC_INT_FIELD(name, member)                                                          \
  Field {                                                                                    \
    name, [](RunConfig& c, const std::string& v) { c.member = static_cast<decltype(c.member)>( \
                                                       parse_int(name, v)); },               \
        [](const RunConfig& c) { return std::to_string(c.member); }                          \
  }
#define PVC_DOUBLE_FIELD(name, member)                                               \
  Field {                                                                            \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_double(name, v); }, \
        [](const RunConfig& c) { return format_double(c.member); }                   \
  }
#define PVC_PATH_FIELD(name, member)                                        \
  Field {                                                                   \
    name, [](RunConfig& c, const std::string& v) { c.member = fs::path(v); }, \
        [](const RunConfig& c) { return c.member.string(); }                \
  }
#define PVC_OPTIONAL_FIELD(name, member)                                                 \
  Field {                                                                                \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_optional(name, v); }, \
        [](const RunConfig& c) { return format_optional(c.member); }                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      PVC_INT_FIELD("frame.sample_rate", frame.sample_rate),
      PVC_DOUBLE_FIELD("frame.hop_s", frame.hop_s),
      PVC_DOUBLE_FIELD("frame.win_s", frame.win_s),
      PVC_INT_FIELD("frame.fft_size", frame.fft_size),

      Field{"model.mode", [](RunConfig& c, const std::string& v) { c.model.mode = parse_mode(v); },
            [](const RunConfig& c) { return std::string(mode_name(c.model.mode)); }},
      PVC_INT_FIELD("model.d_p", model.d_p),
      PVC_INT_FIELD("model.d_e", model.d_e),
      Field{"model.ref_batch_norm",
            [](RunConfig& c, const std::string& v) { c.model.ref_batch_norm = parse_bool("model.ref_batch_norm", v); },
            [](const RunConfig& c) { return std::string(c.model.ref_batch_norm ? "true" : "false"); }},
      PVC_INT_FIELD("model.bank_k", model.bank_k),
      PVC_INT_FIELD("model.bank_filters", model.bank_filters),
      PVC_INT_FIELD("model.highway_layers", model.highway_layers),
      PVC_INT_FIELD("model.highway_units", model.highway_units),
      PVC_INT_FIELD("model.gru_units", model.gru_units),

      PVC_DOUBLE_FIELD("train.learning_rate", train.learning_rate),
      PVC_INT_FIELD("train.batch_size", train.batch_size),
      PVC_INT_FIELD("train.max_steps", train.max_steps),
      PVC_DOUBLE_FIELD("train.grad_clip_norm", train.grad_clip_norm),
      Field{"train.seed", [](RunConfig& c, const std::string& v) { c.train.seed = parse_uint("train.seed", v); },
            [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      PVC_INT_FIELD("train.checkpoint_every", train.checkpoint_every),

      Field{"ppg.source",
            [](RunConfig& c, const std::string& v) {
              if (v == "toy") {
                c.ppg_source = PpgSource::kToy;
              } else if (v == "external") {
                c.ppg_source = PpgSource::kExternal;
              } else {
                throw UsageError("config key 'ppg.source': expected toy or external, got '" + v + "'");
              }
            },
            [](const RunConfig& c) { return std::string(c.ppg_source == PpgSource::kToy ? "toy" : "external"); }},
      PVC_PATH_FIELD("ppg.checkpoint", ppg_checkpoint),
      PVC_PATH_FIELD("ppg.dir", ppg_dir),
      PVC_INT_FIELD("ppg.context", ppg_model.context),
      PVC_INT_FIELD("ppg.hidden", ppg_model.hidden),
      PVC_INT_FIELD("ppg.steps", ppg_train.steps),
      PVC_INT_FIELD("ppg.batch_frames", ppg_train.batch_frames),
      PVC_DOUBLE_FIELD("ppg.learning_rate", ppg_train.learning_rate),

      Field{"augment.factors",
            [](RunConfig& c, const std::string& v) { c.speed_factors = parse_list("augment.factors", v); },
            [](const RunConfig& c) { return format_list(c.speed_factors); }},

      PVC_PATH_FIELD("paths.cache", cache_dir),
      PVC_PATH_FIELD("paths.out", out_dir),
      Field{"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_uint("seed", v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},

      PVC_DOUBLE_FIELD("vocoder.vuv_threshold", vocoder.vuv_threshold),
      PVC_DOUBLE_FIELD("vocoder.peak", vocoder.peak),
      Field{"vocoder.noise_seed",
            [](RunConfig& c, const std::string& v) { c.vocoder.noise_seed = parse_uint("vocoder.noise_seed", v); },
            [](const RunConfig& c) { return std::to_string(c.vocoder.noise_seed); }},

      PVC_OPTIONAL_FIELD("eval.max_mcd_db", thresholds.max_mcd_db),
      PVC_OPTIONAL_FIELD("eval.max_f0_rmse_hz", thresholds.max_f0_rmse_hz),
      PVC_OPTIONAL_FIELD("eval.max_vuv_error_rate", thresholds.max_vuv_error_rate),
  };
  return table;
}

#undef PVC_INT_FIELD
#undef PVC_DOUBLE_FIELD
#undef PVC_PATH_FIELD
#undef PVC_OPTIONAL_FIELD

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw UsageError("unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) { find_field(key).set(*this, value); }

std::string RunConfig::get(const std::string& key) const { return find_field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return out;
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

RunConfig RunConfig::parse(const std::string& text, const std::string& source) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
  return out;
}

void RunConfig::validate() const {
  frame.validate();
  train.validate();
  if (model.d_p < 1 || model.d_e < 1 || model.bank_k < 1 || model.bank_filters < 1 || model.highway_layers < 0 ||
      model.highway_units < 1 || model.gru_units < 1) {
    throw UsageError("model dimensions must be positive");
  }
  if (ppg_model.context < 0 || ppg_model.hidden < 1 || ppg_train.steps < 1 || ppg_train.batch_frames < 1 ||
      !(ppg_train.learning_rate > 0)) {
    throw UsageError("ppg classifier settings must be positive");
  }
  if (ppg_source == PpgSource::kExternal && ppg_dir.empty()) {
    throw UsageError("ppg.source = external needs ppg.dir");
  }
  if (std::find(speed_factors.begin(), speed_factors.end(), 1.0) == speed_factors.end()) {
    throw UsageError("augment.factors must include 1.0");
  }
  if (!(vocoder.peak >= 0.0 && vocoder.peak <= 1.0)) throw UsageError("vocoder.peak must be in [0, 1]");
}

ClassifierConfig RunConfig::classifier_config() const {
  ClassifierConfig c = ppg_model;
  c.d_p = model.d_p;
  c.mel_dim = model.mel_dim;
  return c;
}

uint64_t RunConfig::extraction_hash() const { return fnv1a64("pvc-extract-v1;" + frame.canonical()); }

fs::path write_resolved_config(const RunConfig& config, const fs::path& dir, const std::string& command,
                               const std::string& command_line) {
  fs::create_directories(dir);
  const fs::path path = dir / (command + ".resolved.cfg");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# " << command_line << "\n" << config.to_text();
  return path;
}

}  // namespace pvc
