#include "pvc/corpus/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "pvc/hash.h"

namespace pvc {
namespace {

constexpr char kMagic[4] = {'P', 'V', 'C', 'K'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, size_t end, const std::filesystem::path& path)
      : bytes_(bytes), end_(end), path_(path) {}

  template <typename T>
  T read() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string read_string(size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void read_floats(float* dst, size_t n) {
    need(n * sizeof(float));
    std::memcpy(dst, bytes_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
  }

  size_t pos() const { return pos_; }

 private:
  void need(size_t n) const {
    if (pos_ + n > end_) throw CorruptCheckpointError(path_.string() + ": truncated checkpoint");
  }

  const std::string& bytes_;
  size_t end_;
  size_t pos_ = 0;
  const std::filesystem::path& path_;
};

}  // namespace

const Matrix& CheckpointData::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw DataError("checkpoint has no tensor '" + name + "'");
}

void save_checkpoint(const std::filesystem::path& path, const CheckpointData& data) {
  std::string out;
  out.append(kMagic, 4);
  put<uint32_t>(out, kCheckpointVersion);
  const std::string config = data.config.dump();
  put<uint64_t>(out, config.size());
  out += config;
  put<int64_t>(out, data.step);
  put<uint32_t>(out, static_cast<uint32_t>(data.tensors.size()));
  for (const auto& t : data.tensors) {
    put<uint32_t>(out, static_cast<uint32_t>(t.name.size()));
    out += t.name;
    put<uint32_t>(out, static_cast<uint32_t>(t.value.rows()));
    put<uint32_t>(out, static_cast<uint32_t>(t.value.cols()));
    out.append(reinterpret_cast<const char*>(t.value.data()), sizeof(float) * t.value.size());
  }
  put<uint64_t>(out, fnv1a64(out.data(), out.size()));

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError(path.string() + ": cannot open checkpoint for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError(path.string() + ": checkpoint write failed");
  }
  std::filesystem::rename(tmp, path);
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(path.string() + ": cannot read checkpoint");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string bytes = ss.str();
  if (bytes.size() < 4 + 4 + 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CorruptCheckpointError(path.string() + ": not a checkpoint file");
  }
  const size_t body = bytes.size() - 8;
  uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, 8);
  Reader r(bytes, body, path);
  r.read_string(4);
  const auto version = r.read<uint32_t>();
  if (version != kCheckpointVersion) {
    throw CorruptCheckpointError(path.string() + ": checkpoint version " + std::to_string(version) +
                                 " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  if (fnv1a64(bytes.data(), body) != stored) {
    throw CorruptCheckpointError(path.string() + ": checksum mismatch (corrupt checkpoint)");
  }

  CheckpointData data;
  const auto config_len = r.read<uint64_t>();
  try {
    data.config = nlohmann::json::parse(r.read_string(config_len));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpointError(path.string() + ": bad config block: " + e.what());
  }
  data.step = r.read<int64_t>();
  const auto count = r.read<uint32_t>();
  data.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.read_string(r.read<uint32_t>());
    const auto rows = r.read<uint32_t>();
    const auto cols = r.read<uint32_t>();
    t.value.resize(rows, cols);
    r.read_floats(t.value.data(), static_cast<size_t>(rows) * cols);
    data.tensors.push_back(std::move(t));
  }
  if (r.pos() != body) throw CorruptCheckpointError(path.string() + ": trailing bytes");
  return data;
}

}  // namespace pvc
