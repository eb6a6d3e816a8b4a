#ifndef PVC_HASH_H_
#define PVC_HASH_H_

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace pvc {

inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

// 64-bit FNV-1a. Stable across platforms, used for config and payload hashes.
inline uint64_t fnv1a64(const void* data, size_t size, uint64_t h = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = kFnvOffset) {
  return fnv1a64(s.data(), s.size(), h);
}

}  // namespace pvc

#endif  // PVC_HASH_H_
