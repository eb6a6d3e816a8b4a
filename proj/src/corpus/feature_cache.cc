#include "pvc/corpus/feature_cache.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "pvc/corpus/manifest.h"

namespace pvc {
namespace {

static_assert(std::endian::native == std::endian::little,
              "feature files are written with a native little-endian memcpy");

constexpr char kMagic[4] = {'P', 'V', 'F', '1'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_at(const std::string& in, size_t offset) {
  T v;
  std::memcpy(&v, in.data() + offset, sizeof(T));
  return v;
}

}  // namespace

std::string_view kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMel: return "mel";
    case FeatureKind::kBfccAcoustic: return "bfcc_acoustic";
    case FeatureKind::kF0Vuv: return "f0vuv";
    case FeatureKind::kPpg: return "ppg";
    case FeatureKind::kProsody: return "prosody";
  }
  return "unknown";
}

FeatureKind parse_kind(std::string_view name) {
  for (auto k : {FeatureKind::kMel, FeatureKind::kBfccAcoustic, FeatureKind::kF0Vuv,
                 FeatureKind::kPpg, FeatureKind::kProsody}) {
    if (kind_name(k) == name) return k;
  }
  throw DataError("unknown feature kind '" + std::string(name) + "'");
}

void FeatureRecord::validate() const {
  if (!is_valid_utterance_id(utterance_id)) {
    throw DataError("invalid utterance id '" + utterance_id + "'");
  }
  if (!data.allFinite()) {
    throw DataError(utterance_id + "/" + std::string(kind_name(kind)) + ": non-finite values");
  }
}

void write_feature_file(const std::filesystem::path& path, const FeatureRecord& record,
                        uint64_t config_hash) {
  std::string out;
  out.reserve(kFeatureHeaderBytes + sizeof(float) * record.data.size());
  out.append(kMagic, 4);
  put<uint32_t>(out, static_cast<uint32_t>(record.kind));
  put<uint32_t>(out, static_cast<uint32_t>(record.data.rows()));
  put<uint32_t>(out, static_cast<uint32_t>(record.data.cols()));
  put<uint64_t>(out, config_hash);
  out.append(reinterpret_cast<const char*>(record.data.data()),
             sizeof(float) * record.data.size());

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(path.string() + ": cannot open for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError(path.string() + ": write failed");
}

FeatureFile read_feature_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingKeyError(path.string() + ": no such feature file");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string in = ss.str();
  if (in.size() < kFeatureHeaderBytes || std::memcmp(in.data(), kMagic, 4) != 0) {
    throw DataError(path.string() + ": not a feature file");
  }
  FeatureFile out;
  const auto kind = get_at<uint32_t>(in, 4);
  if (kind < 1 || kind > 5) throw DataError(path.string() + ": unknown kind tag");
  out.record.kind = static_cast<FeatureKind>(kind);
  const auto rows = get_at<uint32_t>(in, 8);
  const auto cols = get_at<uint32_t>(in, 12);
  out.config_hash = get_at<uint64_t>(in, 16);
  const size_t count = static_cast<size_t>(rows) * cols;
  if (in.size() != kFeatureHeaderBytes + count * sizeof(float)) {
    throw DataError(path.string() + ": payload size does not match T x D header");
  }
  out.record.data.resize(rows, cols);
  std::memcpy(out.record.data.data(), in.data() + kFeatureHeaderBytes, count * sizeof(float));

  std::string stem = path.filename().string();
  if (stem.size() > 5 && stem.ends_with(".feat")) stem.resize(stem.size() - 5);
  const std::string suffix = "." + std::string(kind_name(out.record.kind));
  if (stem.ends_with(suffix)) stem.resize(stem.size() - suffix.size());
  out.record.utterance_id = stem;
  return out;
}

FeatureCache::FeatureCache(std::filesystem::path dir, uint64_t config_hash)
    : dir_(std::move(dir)), config_hash_(config_hash) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path FeatureCache::path_for(const std::string& utterance_id,
                                             FeatureKind kind) const {
  return dir_ / (utterance_id + "." + std::string(kind_name(kind)) + ".feat");
}

std::filesystem::path FeatureCache::put(const FeatureRecord& record) const {
  record.validate();
  const auto final_path = path_for(record.utterance_id, record.kind);
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  auto tmp = final_path;
  tmp += ".tmp" + tid.str();
  write_feature_file(tmp, record, config_hash_);
  std::filesystem::rename(tmp, final_path);
  return final_path;
}

FeatureRecord FeatureCache::get(const std::string& utterance_id, FeatureKind kind) const {
  const auto path = path_for(utterance_id, kind);
  if (!std::filesystem::exists(path)) {
    throw MissingKeyError("feature cache has no " + std::string(kind_name(kind)) +
                          " record for '" + utterance_id + "'");
  }
  FeatureFile file = read_feature_file(path);
  if (file.config_hash != config_hash_) {
    throw StaleCacheError(path.string() +
                          ": stale cache entry (extraction config changed); re-run extract");
  }
  if (file.record.kind != kind) throw DataError(path.string() + ": kind tag mismatch");
  file.record.utterance_id = utterance_id;
  return std::move(file.record);
}

bool FeatureCache::contains_valid(const std::string& utterance_id, FeatureKind kind) const {
  try {
    get(utterance_id, kind);
    return true;
  } catch (const DataError&) {
    return false;
  }
}

}  // namespace pvc
