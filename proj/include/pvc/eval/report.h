#ifndef PVC_EVAL_REPORT_H_
#define PVC_EVAL_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pvc/dsp/frame_spec.h"
#include "pvc/eval/metrics.h"

namespace pvc {

// Default MCD ceiling for copy-synthesis runs. Copies of the bundled corpus
// measure 22-27 dB, different speakers 40 dB and up.
inline constexpr double kCopySynthesisMcdCeilingDb = 32.0;

struct ReportThresholds {
  std::optional<double> max_mcd_db;
  std::optional<double> max_f0_rmse_hz;
  std::optional<double> max_vuv_error_rate;
};

struct ReportOptions {
  FrameSpec spec;
  // Defaults to the run directory.
  std::filesystem::path out_dir;
  // "step loss" lines; plotted when set. <run>/loss.log is used when present
  // and this is empty.
  std::filesystem::path loss_log;
  // Check mode: ThresholdError when the aggregate violates a threshold.
  bool check = false;
  ReportThresholds thresholds;
};

struct PairResult {
  std::string id;
  MetricReport metrics;
};

struct EvalReport {
  std::vector<PairResult> pairs;
  // Mean over pairs; n_frames is the total.
  MetricReport aggregate;
  std::filesystem::path table_path;
  std::vector<std::filesystem::path> plots;
};

// Evaluates every <run>/ref/<id>.wav against <run>/conv/<id>.wav and writes
// report.txt, plots/f0_<id>.svg and, with a loss log, plots/loss.svg into the
// output directory. Throws DataError when the directory holds no pairs or an
// id is present on one side only.
EvalReport run_report(const std::filesystem::path& run_dir, const ReportOptions& options);

// One row per pair plus an "aggregate" row.
std::string format_report_table(const EvalReport& report);

// Throws ThresholdError listing every violated threshold.
void check_thresholds(const MetricReport& aggregate, const ReportThresholds& thresholds);

std::vector<std::pair<int64_t, double>> read_loss_log(const std::filesystem::path& path);

}  // namespace pvc

#endif  // PVC_EVAL_REPORT_H_
