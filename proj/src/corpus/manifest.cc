#include "pvc/corpus/manifest.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "pvc/common.h"
#include "pvc/random.h"

namespace pvc {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '|')) fields.push_back(field);
  if (!line.empty() && line.back() == '|') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& what, int line_no) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("manifest line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

bool is_valid_utterance_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  for (char c : id) {
    if (c == '/' || c == '\\' || c == '|' || c == '\n' || c == '\0') return false;
  }
  return true;
}

std::vector<Utterance> Manifest::shuffled(uint64_t seed) const {
  std::vector<Utterance> out = entries;
  Rng rng(seed);
  for (size_t i = out.size(); i > 1; --i) {
    std::swap(out[i - 1], out[rng.below(i)]);
  }
  return out;
}

Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line == "#split=train") m.split = Split::kTrain;
      else if (line == "#split=eval") m.split = Split::kEval;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 4 && f.size() != 5) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": expected id|speaker|path|duration[|speed]");
    }
    Utterance u;
    u.id = f[0];
    u.speaker = f[1];
    u.audio_path = f[2];
    if (u.audio_path.is_relative()) u.audio_path = base_dir / u.audio_path;
    u.duration_s = parse_double(f[3], "duration", line_no);
    if (f.size() == 5) u.speed = parse_double(f[4], "speed", line_no);
    m.entries.push_back(std::move(u));
  }
  return m;
}

void validate_manifest(const Manifest& manifest, bool check_files) {
  if (manifest.entries.empty()) throw DataError("manifest is empty");
  std::set<std::string> ids;
  for (const auto& u : manifest.entries) {
    if (!is_valid_utterance_id(u.id)) throw DataError("invalid utterance id '" + u.id + "'");
    if (!ids.insert(u.id).second) throw DataError("duplicate utterance id '" + u.id + "'");
    if (!(u.duration_s > 0.0)) throw DataError(u.id + ": duration must be positive");
    if (!(u.speed > 0.0)) throw DataError(u.id + ": speed factor must be positive");
    if (check_files && !std::filesystem::exists(u.audio_path)) {
      throw DataError(u.id + ": audio file not found: " + u.audio_path.string());
    }
  }
}

Manifest load_manifest(const std::filesystem::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot read manifest");
  std::stringstream ss;
  ss << in.rdbuf();
  Manifest m = parse_manifest(ss.str(), path.parent_path());
  try {
    validate_manifest(m, check_files);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot write manifest");
  out << (manifest.split == Split::kTrain ? "#split=train\n" : "#split=eval\n");
  for (const auto& u : manifest.entries) {
    out << u.id << '|' << u.speaker << '|' << u.audio_path.string() << '|'
        << format_double(u.duration_s);
    if (u.speed != 1.0) out << '|' << format_double(u.speed);
    out << '\n';
  }
}

}  // namespace pvc
