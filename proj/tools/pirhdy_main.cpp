#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pirhdy/pipeline/pipeline.h"

using namespace pirhdy;

namespace {

void printCurveTail(const TrainResult& result) {
  if (result.epochs.empty()) return;
  const auto& first = result.epochs.front();
  const auto& last = result.epochs.back();
  std::printf("epoch %d: train %.6f, holdout %.6f\n", first.epoch, first.trainBce,
              first.holdoutBce);
  if (result.epochs.size() > 1)
    std::printf("epoch %d: train %.6f, holdout %.6f\n", last.epoch, last.trainBce,
                last.holdoutBce);
}

void printReport(const MetricReport& report) {
  std::printf("instances %zu, MAP %.6f\n", report.nInstances, report.map);
  for (const auto& [k, v] : report.hits) std::printf("hits@%d %.6f\n", k, v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic-music embedding pipeline: MIDI ingestion, tokenization, "
               "training, and ranking evaluation"};
  app.require_subcommand(1);

  std::string configPath;
  std::optional<uint64_t> seedOpt;
  std::optional<int> wmOpt;
  std::optional<int> whOpt;
  std::optional<std::string> fusionOpt;
  std::optional<std::string> featuresOpt;
  app.add_option("--config", configPath, "pipeline config JSON");
  app.add_option("--seed", seedOpt, "override the training seed");
  app.add_option("--w-m", wmOpt, "override the melodic window half-width");
  app.add_option("--w-h", whOpt, "override the harmonic octave window");
  app.add_option("--fusion", fusionOpt, "branch fusion: wt|avg|melody|harmony");
  app.add_option("--features", featuresOpt,
                 "comma-separated subset of chroma,octave,ioi,state,velocity");

  auto* preprocess =
      app.add_subcommand("preprocess", "MIDI files -> per-song grids + manifest");
  auto* vocabCmd = app.add_subcommand("vocab", "grids -> vocabulary JSON");
  auto* corpusCmd =
      app.add_subcommand("corpus", "grids + vocabulary -> training corpora");
  auto* trainCmd = app.add_subcommand("train", "local corpus -> pretrained checkpoint");
  auto* finetuneCmd =
      app.add_subcommand("finetune", "pretrained checkpoint -> task checkpoint");
  auto* evalCmd = app.add_subcommand("eval", "ranking evaluation -> JSON report");
  auto* exportCmd = app.add_subcommand("export", "checkpoint -> labeled-vector text");

  std::string finetuneMode;
  std::string finetuneIn;
  std::string finetuneOut;
  finetuneCmd->add_option("--mode", finetuneMode, "gm (melody) or gh (accompaniment)")
      ->required()
      ->check(CLI::IsMember({"gm", "gh"}));
  finetuneCmd->add_option("--checkpoint", finetuneIn, "pretrained checkpoint path");
  finetuneCmd->add_option("--out", finetuneOut, "output checkpoint path");

  std::string evalTask;
  std::string evalCheckpoint;
  evalCmd->add_option("--task", evalTask, "melody or accompaniment")
      ->required()
      ->check(CLI::IsMember({"melody", "accompaniment"}));
  evalCmd->add_option("--checkpoint", evalCheckpoint, "fine-tuned checkpoint path");

  std::string exportMode;
  std::string exportCheckpoint;
  std::string exportOut;
  exportCmd->add_option("--mode", exportMode, "gm or gh")
      ->required()
      ->check(CLI::IsMember({"gm", "gh"}));
  exportCmd->add_option("--checkpoint", exportCheckpoint, "fine-tuned checkpoint path");
  exportCmd->add_option("--out", exportOut, "output .vec path");

  for (auto* sub : {preprocess, vocabCmd, corpusCmd, trainCmd, finetuneCmd, evalCmd, exportCmd})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    PipelineConfig cfg;
    if (!configPath.empty()) cfg = loadPipelineConfig(configPath);
    if (seedOpt) cfg.train.seed = *seedOpt;
    if (wmOpt) cfg.train.wM = *wmOpt;
    if (whOpt) cfg.train.wH = *whOpt;
    if (fusionOpt) cfg.train.fusion = parseFusionName(*fusionOpt);
    if (featuresOpt) cfg.train.features = parseFeatureList(*featuresOpt);

    if (preprocess->parsed()) {
      const PreprocessResult result = cmdPreprocess(cfg);
      size_t bad = 0;
      for (const auto& entry : result.entries) {
        if (entry.status != "ok") ++bad;
        std::printf("%-9s %s%s%s\n", entry.status.c_str(), entry.file.c_str(),
                    entry.detail.empty() ? "" : ": ", entry.detail.c_str());
      }
      std::printf("%zu ok, %zu not ok -> %s/manifest.json\n", result.okCount, bad,
                  cfg.corpusOut.c_str());
      if (result.okCount == 0) return 1;
      return bad == 0 ? 0 : 2;
    }
    if (vocabCmd->parsed()) {
      cmdVocab(cfg);
      std::printf("vocabulary -> %s\n", cfg.vocabOut.c_str());
    } else if (corpusCmd->parsed()) {
      cmdCorpus(cfg);
      std::printf("corpora -> %s\n", cfg.corpusOut.c_str());
    } else if (trainCmd->parsed()) {
      printCurveTail(cmdTrain(cfg));
      std::printf("checkpoint -> %s\n", cfg.modelOut.c_str());
    } else if (finetuneCmd->parsed()) {
      const GlobalMode mode = finetuneMode == "gm" ? GlobalMode::GM : GlobalMode::GH;
      printCurveTail(cmdFinetune(cfg, mode, finetuneIn, finetuneOut));
      const std::string written =
          finetuneOut.empty() ? finetuneCheckpointPath(cfg, mode) : finetuneOut;
      std::printf("checkpoint -> %s\n", written.c_str());
    } else if (evalCmd->parsed()) {
      printReport(cmdEval(cfg, evalTask, evalCheckpoint));
      std::printf("report -> %s\n", cfg.reportOut.c_str());
    } else if (exportCmd->parsed()) {
      const GlobalMode mode = exportMode == "gm" ? GlobalMode::GM : GlobalMode::GH;
      const std::string written = cmdExport(cfg, mode, exportCheckpoint, exportOut);
      std::printf("vectors -> %s\n", written.c_str());
    }
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fatal: %s\n", e.what());
    return 1;
  }
}
