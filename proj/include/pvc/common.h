#ifndef PVC_COMMON_H_
#define PVC_COMMON_H_

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pvc {

// Row-major so that a (B*T) x C activation buffer can be reinterpreted as
// (B*T*F) x (C/F) without copying.
using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<float, 1, Eigen::Dynamic>;

struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Base for every error the library reports. The CLI maps the subclasses to
// exit codes (usage 1, data 2, threshold 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ThresholdError : public Error {
 public:
  using Error::Error;
};

// Configuration recorded in an artifact disagrees with the one requested.
class ConfigMismatchError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace pvc

#endif  // PVC_COMMON_H_
