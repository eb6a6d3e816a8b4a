#ifndef PVC_CORPUS_FEATURE_CACHE_H_
#define PVC_CORPUS_FEATURE_CACHE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "pvc/common.h"

namespace pvc {

enum class FeatureKind : uint32_t {
  kMel = 1,
  kBfccAcoustic = 2,
  kF0Vuv = 3,
  kPpg = 4,
  kProsody = 5,
};

std::string_view kind_name(FeatureKind kind);
FeatureKind parse_kind(std::string_view name);

// A T x D float payload for one utterance. frames() == data.rows().
struct FeatureRecord {
  std::string utterance_id;
  FeatureKind kind = FeatureKind::kMel;
  Matrix data;

  int frames() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }

  // Throws DataError on non-finite values or an invalid id.
  void validate() const;
};

class MissingKeyError : public DataError {
 public:
  using DataError::DataError;
};

// Cached features were produced under a different extraction config.
class StaleCacheError : public DataError {
 public:
  using DataError::DataError;
};

// On-disk layout (little-endian):
//
//   char[4]  magic "PVF1"
//   u32      kind tag
//   u32      T
//   u32      D
//   u64      config hash
//   f32[T*D] row-major payload
inline constexpr size_t kFeatureHeaderBytes = 24;

void write_feature_file(const std::filesystem::path& path, const FeatureRecord& record,
                        uint64_t config_hash);

struct FeatureFile {
  FeatureRecord record;
  uint64_t config_hash = 0;
};

// The utterance id is taken from the file name stem ("<id>.<kind>.feat").
FeatureFile read_feature_file(const std::filesystem::path& path);

// Directory of feature files keyed on (utterance id, kind), stamped with the
// hash of the extraction config that produced them. Readers may run
// concurrently; writes go through a temporary file and a rename so a reader
// never observes a partial record.
class FeatureCache {
 public:
  FeatureCache(std::filesystem::path dir, uint64_t config_hash);

  std::filesystem::path put(const FeatureRecord& record) const;

  // Throws MissingKeyError or StaleCacheError.
  FeatureRecord get(const std::string& utterance_id, FeatureKind kind) const;

  // True when a record exists and carries the current config hash.
  bool contains_valid(const std::string& utterance_id, FeatureKind kind) const;

  std::filesystem::path path_for(const std::string& utterance_id, FeatureKind kind) const;

  uint64_t config_hash() const { return config_hash_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  uint64_t config_hash_;
};

}  // namespace pvc

#endif  // PVC_CORPUS_FEATURE_CACHE_H_
