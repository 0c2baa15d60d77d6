#pragma once

#include "pirhdy/grid/corpus_io.h"
#include "pirhdy/model/context_model.h"

namespace pirhdy {

struct EpochStat {
  int epoch = 0;         // 0 is the untrained baseline row
  double trainBce = 0.0;
  double holdoutBce = 0.0;
};

struct TrainResult {
  std::vector<EpochStat> epochs;
};

/// Minibatch Adam over sample groups with a deterministic 10% group
/// holdout. Row 0 of the result is measured before any update.
TrainResult trainLocal(ContextModel& model, const LocalCorpus& corpus,
                       const TrainConfig& cfg);

enum class GlobalMode { GM, GH };

/// Raises NotPretrained unless the store holds a full pretrained model.
void requirePretrained(const ParamStore& store, const TrainConfig& cfg, int chromaCount);

/// Fine-tunes phrase-pair scoring: positives from the pair corpus, one
/// uniformly resampled negative per positive (never content-equal to the
/// true partner). GM scores successor phrases through the melodic phrase
/// encoder on both sides; GH scores accompaniment phrases through the
/// harmonic track-side encoder.
TrainResult finetuneGlobal(ContextModel& model, const PairCorpus& pairs, GlobalMode mode,
                           const TrainConfig& cfg);

}  // namespace pirhdy
