// pvc: extract, augment, train, convert, eval, stats, make-corpus.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pvc/cli/commands.h"
#include "pvc/cli/run_config.h"
#include "pvc/models/features.h"

namespace fs = std::filesystem;
using namespace pvc;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitThreshold = 3;

std::string command_line(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) out += (i ? " " : "") + std::string(argv[i]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale any-to-one voice conversion toolkit."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "Run config file (key = value lines)");
  app.add_option("-s,--set", overrides, "Override a config key, e.g. --set train.max_steps=500")->take_all();

  auto* corpus = app.add_subcommand("make-corpus", "Write the synthetic two-speaker corpus");
  std::string corpus_out;
  int corpus_n = 20;
  double corpus_seconds = 1.5;
  corpus->add_option("--out", corpus_out, "Output directory")->required();
  corpus->add_option("-n,--utterances", corpus_n, "Utterances per speaker")->capture_default_str();
  corpus->add_option("--seconds", corpus_seconds, "Nominal utterance length")->capture_default_str();

  auto* extract = app.add_subcommand("extract", "Cache mel, acoustic, f0/vuv and PPG features");
  std::string manifest;
  extract->add_option("manifest", manifest, "Utterance manifest")->required()->check(CLI::ExistingFile);

  auto* augment = app.add_subcommand("augment", "Write speed-perturbed copies and an expanded manifest");
  std::string augment_out;
  augment->add_option("manifest", manifest, "Utterance manifest")->required()->check(CLI::ExistingFile);
  augment->add_option("--out", augment_out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train the PPG classifier or the conversion model");
  std::string stage = "vc";
  std::vector<std::string> train_manifests;
  std::string resume;
  train->add_option("--stage", stage, "ppg or vc")->check(CLI::IsMember({"ppg", "vc"}))->capture_default_str();
  train->add_option("manifests", train_manifests, "Manifest(s); vc takes the target speaker's")->required();
  train->add_option("--resume", resume, "Checkpoint to resume the vc stage from")->check(CLI::ExistingFile);

  auto* stats = app.add_subcommand("stats", "Estimate log-f0 statistics for a speaker");
  std::string stats_out;
  stats->add_option("manifest", manifest, "Utterance manifest")->required()->check(CLI::ExistingFile);
  stats->add_option("--out", stats_out, "Statistics file")->required();

  auto* conv = app.add_subcommand("convert", "Convert one utterance to the target speaker");
  ConvertRequest request;
  std::string mode;
  conv->add_option("input", request.input, "Source wav")->required()->check(CLI::ExistingFile);
  conv->add_option("output", request.output, "Converted wav")->required();
  conv->add_option("--checkpoint", request.checkpoint, "Conversion model checkpoint")->required();
  conv->add_option("--target-stats", request.target_stats, "Target speaker statistics")->required();
  conv->add_option("--source-stats", request.source_stats, "Source speaker statistics (default: from the input)");
  conv->add_option("--mode", mode, "Expected model mode")->check(CLI::IsMember({"baseline", "proposed"}));

  auto* eval = app.add_subcommand("eval", "Objective metrics for ref/ and conv/ wav pairs");
  std::string run_dir, loss_log;
  bool check = false;
  eval->add_option("run_dir", run_dir, "Directory with ref/ and conv/")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--loss-log", loss_log, "Loss log to plot")->check(CLI::ExistingFile);
  eval->add_flag("--check", check, "Exit 3 when an eval.* threshold is violated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  const std::string cmdline = command_line(argc, argv);
  try {
    RunConfig config = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    for (const auto& o : overrides) config.apply_override(o);
    config.validate();

    if (corpus->parsed()) {
      cmd_make_corpus(corpus_out, corpus_n, corpus_seconds, config.seed, std::cout);
      write_resolved_config(config, corpus_out, "make-corpus", cmdline);
    } else if (extract->parsed()) {
      write_resolved_config(config, config.cache_dir, "extract", cmdline);
      const ExtractSummary s = cmd_extract(config, manifest, std::cerr);
      if (!s.failures.empty()) return kExitData;
    } else if (augment->parsed()) {
      write_resolved_config(config, augment_out, "augment", cmdline);
      cmd_augment(config, manifest, augment_out, std::cerr);
    } else if (train->parsed()) {
      if (stage == "ppg") {
        const fs::path dir = config.ppg_checkpoint.parent_path();
        write_resolved_config(config, dir.empty() ? fs::path(".") : dir, "train-ppg", cmdline);
        std::vector<fs::path> paths(train_manifests.begin(), train_manifests.end());
        cmd_train_ppg(config, paths, std::cerr);
      } else {
        if (train_manifests.size() != 1) throw UsageError("train --stage vc takes exactly one manifest");
        write_resolved_config(config, config.out_dir, "train-vc", cmdline);
        cmd_train_vc(config, train_manifests.front(),
                     resume.empty() ? std::nullopt : std::optional<fs::path>(resume), std::cerr);
      }
    } else if (stats->parsed()) {
      const fs::path out(stats_out);
      write_resolved_config(config, out.has_parent_path() ? out.parent_path() : fs::path("."), "stats", cmdline);
      cmd_stats(config, manifest, out, std::cerr);
    } else if (conv->parsed()) {
      if (!mode.empty()) request.mode = parse_mode(mode);
      write_resolved_config(config, request.output.has_parent_path() ? request.output.parent_path() : fs::path("."),
                            "convert", cmdline);
      cmd_convert(config, request, std::cerr);
    } else if (eval->parsed()) {
      write_resolved_config(config, run_dir, "eval", cmdline);
      cmd_eval(config, run_dir, check, loss_log, std::cout);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ThresholdError& e) {
    std::cerr << "threshold failure: " << e.what() << "\n";
    return kExitThreshold;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
