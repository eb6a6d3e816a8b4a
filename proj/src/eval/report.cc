#include "pvc/eval/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "pvc/corpus/wav.h"
#include "pvc/dsp/pitch.h"
#include "pvc/eval/plot.h"

namespace fs = std::filesystem;

namespace pvc {
namespace {

std::set<std::string> wav_ids(const fs::path& dir) {
  std::set<std::string> ids;
  if (!fs::is_directory(dir)) return ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") ids.insert(e.path().stem().string());
  }
  return ids;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

PlotSeries f0_series(const std::string& label, const PitchTrack& track, const FrameSpec& spec) {
  PlotSeries s;
  s.label = label;
  for (int t = 0; t < track.frames(); ++t) {
    s.x.push_back(t * spec.hop_s);
    s.y.push_back(track.vuv[t] > 0.5f ? track.f0_hz[t] : std::numeric_limits<double>::quiet_NaN());
  }
  return s;
}

}  // namespace

std::vector<std::pair<int64_t, double>> read_loss_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read loss log " + path.string());
  std::vector<std::pair<int64_t, double>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int64_t step;
    double loss;
    if (!(ls >> step >> loss)) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 'step loss'");
    }
    out.emplace_back(step, loss);
  }
  return out;
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %8s %10s %12s %10s\n", "id", "frames", "mcd_db", "f0_rmse_hz", "vuv_error");
  os << buf;
  auto row = [&](const std::string& id, const MetricReport& m) {
    std::snprintf(buf, sizeof buf, "%-24s %8d %10.4f %12.4f %10.4f\n", id.c_str(), m.n_frames, m.mcd_db,
                  m.f0_rmse_hz, m.vuv_error_rate);
    os << buf;
  };
  for (const auto& p : report.pairs) row(p.id, p.metrics);
  row("aggregate", report.aggregate);
  return os.str();
}

void check_thresholds(const MetricReport& aggregate, const ReportThresholds& thresholds) {
  std::vector<std::string> failures;
  auto check = [&](const char* name, double value, const std::optional<double>& limit) {
    if (limit && !(value <= *limit)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%s %.4f exceeds %.4f", name, value, *limit);
      failures.emplace_back(buf);
    }
  };
  check("mcd_db", aggregate.mcd_db, thresholds.max_mcd_db);
  check("f0_rmse_hz", aggregate.f0_rmse_hz, thresholds.max_f0_rmse_hz);
  check("vuv_error_rate", aggregate.vuv_error_rate, thresholds.max_vuv_error_rate);
  if (!failures.empty()) throw ThresholdError("threshold check failed: " + join(failures));
}

EvalReport run_report(const fs::path& run_dir, const ReportOptions& options) {
  const auto ref_ids = wav_ids(run_dir / "ref");
  const auto conv_ids = wav_ids(run_dir / "conv");
  if (ref_ids.empty() && conv_ids.empty()) {
    throw DataError("missing pairs: no wav files under " + (run_dir / "ref").string() + " and " +
                    (run_dir / "conv").string());
  }
  std::vector<std::string> only_ref, only_conv;
  std::set_difference(ref_ids.begin(), ref_ids.end(), conv_ids.begin(), conv_ids.end(), std::back_inserter(only_ref));
  std::set_difference(conv_ids.begin(), conv_ids.end(), ref_ids.begin(), ref_ids.end(), std::back_inserter(only_conv));
  if (!only_ref.empty() || !only_conv.empty()) {
    std::string msg = "missing pairs:";
    if (!only_ref.empty()) msg += " no converted wav for " + join(only_ref) + ";";
    if (!only_conv.empty()) msg += " no reference wav for " + join(only_conv) + ";";
    msg.pop_back();
    throw DataError(msg);
  }

  const fs::path out_dir = options.out_dir.empty() ? run_dir : options.out_dir;
  const fs::path plot_dir = out_dir / "plots";
  fs::create_directories(plot_dir);

  EvalReport report;
  for (const auto& id : ref_ids) {
    const Waveform ref = load_wav(run_dir / "ref" / (id + ".wav"));
    const Waveform conv = load_wav(run_dir / "conv" / (id + ".wav"));
    report.pairs.push_back({id, evaluate_pair(ref, conv, options.spec)});

    const fs::path plot = plot_dir / ("f0_" + id + ".svg");
    write_line_plot(plot, {"f0 contour: " + id, "time (s)", "f0 (Hz)", false},
                    {f0_series("reference", track_pitch(ref, options.spec), options.spec),
                     f0_series("converted", track_pitch(conv, options.spec), options.spec)});
    report.plots.push_back(plot);
  }

  const double n = static_cast<double>(report.pairs.size());
  for (const auto& p : report.pairs) {
    report.aggregate.mcd_db += p.metrics.mcd_db / n;
    report.aggregate.f0_rmse_hz += p.metrics.f0_rmse_hz / n;
    report.aggregate.vuv_error_rate += p.metrics.vuv_error_rate / n;
    report.aggregate.n_frames += p.metrics.n_frames;
  }

  fs::path loss_log = options.loss_log;
  if (loss_log.empty() && fs::exists(run_dir / "loss.log")) loss_log = run_dir / "loss.log";
  if (!loss_log.empty()) {
    PlotSeries s;
    s.label = "training loss";
    for (const auto& [step, loss] : read_loss_log(loss_log)) {
      s.x.push_back(static_cast<double>(step));
      s.y.push_back(loss);
    }
    const fs::path plot = plot_dir / "loss.svg";
    write_line_plot(plot, {"loss curve", "step", "L1 loss", true}, {s});
    report.plots.push_back(plot);
  }

  report.table_path = out_dir / "report.txt";
  std::ofstream table(report.table_path);
  if (!table) throw DataError("cannot write " + report.table_path.string());
  table << format_report_table(report);
  table.close();

  if (options.check) check_thresholds(report.aggregate, options.thresholds);
  return report;
}

}  // namespace pvc
