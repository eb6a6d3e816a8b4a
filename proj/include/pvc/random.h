#ifndef PVC_RANDOM_H_
#define PVC_RANDOM_H_

#include <cstdint>
#include <random>

namespace pvc {

// Seeded generator with platform-independent output. std::*_distribution
// results differ between standard libraries, so the conversions are done here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  double normal();

  // Derives an independent generator for a named sub-stream.
  Rng fork(uint64_t stream) const;

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pvc

#endif  // PVC_RANDOM_H_
