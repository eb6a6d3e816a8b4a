#ifndef PVC_CORPUS_CHECKPOINT_H_
#define PVC_CORPUS_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "pvc/common.h"

namespace pvc {

struct NamedTensor {
  std::string name;
  Matrix value;
};

// Self-describing container: a JSON config block, the training step and a
// list of named float tensors, followed by an FNV-1a checksum of everything
// before it.
struct CheckpointData {
  nlohmann::json config;
  int64_t step = 0;
  std::vector<NamedTensor> tensors;

  const Matrix& tensor(const std::string& name) const;
};

inline constexpr uint32_t kCheckpointVersion = 1;

class CorruptCheckpointError : public DataError {
 public:
  using DataError::DataError;
};

void save_checkpoint(const std::filesystem::path& path, const CheckpointData& data);

// Throws CorruptCheckpointError on bad magic, version, truncation or checksum.
CheckpointData load_checkpoint(const std::filesystem::path& path);

}  // namespace pvc

#endif  // PVC_CORPUS_CHECKPOINT_H_
