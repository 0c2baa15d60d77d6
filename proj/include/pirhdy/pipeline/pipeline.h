#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pirhdy/eval/eval.h"
#include "pirhdy/grid/sampling.h"
#include "pirhdy/model/training.h"

namespace pirhdy {

/// Everything one batch run needs: training hyperparameters, artifact
/// paths, filtering limits, and evaluation seeds. Loads from strict JSON
/// (unknown keys rejected).
struct PipelineConfig {
  TrainConfig train;
  std::string midiDir;
  std::string corpusOut;  // working directory: grids/, manifest, corpora
  std::string vocabOut;
  std::string modelOut;
  std::string reportOut;
  SegmentLimits limits;
  uint64_t evalSeed = 1;
  // Songs (by preprocess order) excluded from training and used as the
  // evaluation query split when non-empty.
  std::vector<uint32_t> holdoutSongs;
};

PipelineConfig loadPipelineConfig(const std::string& path);
PipelineConfig parsePipelineConfig(const std::string& jsonText);

/// "chroma,octave,ioi,state,velocity" (any subset, any order).
FeatureMask parseFeatureList(const std::string& csv);
/// "wt" | "avg" | "melody" | "harmony".
FusionMode parseFusionName(const std::string& name);

/// Worker-thread ceiling: PIRHDY_THREADS when set, else the hardware
/// concurrency, never below 1.
int threadCap();

struct ManifestEntry {
  std::string file;    // input basename
  std::string status;  // "ok" | "rejected" | "error"
  std::string detail;  // failure message when not ok
};

struct PreprocessResult {
  std::vector<ManifestEntry> entries;  // one per input, in input order
  size_t okCount = 0;
};

/// parse -> normalize -> transpose -> gridify -> segment for every MIDI
/// file under midi_dir; writes grids/<stem>.grd per surviving song and a
/// manifest accounting for every input exactly once.
PreprocessResult cmdPreprocess(const PipelineConfig& cfg);

/// Vocabulary over all dumped grids -> vocab_out JSON.
void cmdVocab(const PipelineConfig& cfg);

/// Local-context samples with negatives (local.prc) and global phrase
/// pairs (melodic.gpc, harmonic.gpc) over the dumped grids. Holdout songs
/// are skipped for local samples but keep their pairs (filtered later).
void cmdCorpus(const PipelineConfig& cfg);

/// Pretraining on local.prc -> model_out checkpoint, sidecar JSON, and a
/// loss-curve CSV ("epoch,train_bce,holdout_bce").
TrainResult cmdTrain(const PipelineConfig& cfg);

/// Fine-tunes a pretrained checkpoint on the mode's pair corpus, dropping
/// holdout songs' pairs. Architecture fields come from the checkpoint
/// sidecar; optimizer fields from the current config. Empty paths derive
/// from model_out.
TrainResult cmdFinetune(const PipelineConfig& cfg, GlobalMode mode,
                        std::string checkpoint = "", std::string out = "");

/// Ranking evaluation for task "melody" (GM) or "accompaniment" (GH);
/// queries restrict to holdout songs when configured. Writes report_out.
MetricReport cmdEval(const PipelineConfig& cfg, const std::string& task,
                     std::string checkpoint = "");

/// Token-embedding rows for the whole vocabulary plus one "song:<id>" row
/// per dumped grid, in .vec text. Returns the path written.
std::string cmdExport(const PipelineConfig& cfg, GlobalMode mode, std::string checkpoint = "",
                      std::string out = "");

/// model_out with "_gm" / "_gh" before the extension.
std::string finetuneCheckpointPath(const PipelineConfig& cfg, GlobalMode mode);

}  // namespace pirhdy
