#pragma once

#include <array>
#include <string>
#include <vector>

#include "pirhdy/model/token_model.h"

namespace pirhdy {

/// How the melodic and harmonic branch losses combine.
enum class FusionMode { WT, AVG, MelodyOnly, HarmonyOnly };

struct TrainConfig {
  int d = 32;
  int wM = 2;               // melodic window half-width, in on-events
  int wH = 10;              // harmonic octave-distance window
  int rnnLayers = 1;
  FusionMode fusion = FusionMode::WT;
  FeatureMask features;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batchSize = 16;
  int epochs = 10;
  uint64_t seed = 1;
  int negativesPerPositive = 4;
};

struct MelodicCtxCache {
  std::vector<TokenCache> tokens;
  std::vector<GruCache> layers;
  AttnCache attn;
};

struct HarmonicCtxCache {
  std::vector<TokenCache> tokens;
  AttnCache attn;
};

struct HeadCache {
  TokenCache candidate;
  DenseCache hidden;
  DenseCache out;
};

struct BranchLoss {
  double melodic = 0.0;
  double harmonic = 0.0;
  double fused = 0.0;
};

/// Context encoders over token embeddings plus the center-prediction head.
/// The melodic side runs a GRU stack then attention; the harmonic side is
/// attention only. Sequence-level phrase/period/track encoders reuse the
/// same parameter store.
class ContextModel {
 public:
  /// Adds parameters when absent (needs rng), else validates shapes.
  ContextModel(ParamStore& store, const TrainConfig& cfg, int chromaCount, RngStream* rng);

  /// True when the store already holds every parameter this model needs.
  static bool hasParams(const ParamStore& store, const TrainConfig& cfg, int chromaCount);

  const TrainConfig& config() const { return cfg_; }
  const TokenModel& tokens() const { return tokens_; }
  ParamStore& store() const { return *store_; }

  // -- local context ------------------------------------------------------
  Vec encodeMelodicCtx(const std::vector<NoteEvent>& events, MelodicCtxCache& cache) const;
  void melodicCtxBackward(const Vec& dOut, const MelodicCtxCache& cache) const;

  Vec encodeHarmonicCtx(const std::vector<NoteEvent>& events, HarmonicCtxCache& cache) const;
  void harmonicCtxBackward(const Vec& dOut, const HarmonicCtxCache& cache) const;

  /// Head over [context ; candidate-token]: 4 logits ordered
  /// (chroma, octave, velocity, state). The candidate's interval is
  /// forced to zero in the melodic branch.
  Vec predictLabels(const Vec& h, const NoteEvent& candidate, bool melodic,
                    HeadCache& cache) const;
  /// Returns the gradient w.r.t. the context vector.
  Vec predictLabelsBackward(const Vec& dLogits, const HeadCache& cache) const;

  /// Branch mixing weight sigma(gate); 0.5 exactly for AVG.
  double alpha() const;

  /// Mean losses over the given sample groups (each = positive + 4
  /// negatives). With grad, accumulates parameter gradients of the fused
  /// loss including the mixing gate.
  BranchLoss localLoss(const std::vector<LocalSample>& records,
                       const std::vector<size_t>& groupIndices, bool withGrad) const;

  // -- sequence level ------------------------------------------------------
  Vec encodePhrase(const std::vector<NoteEvent>& events, MelodicCtxCache& cache) const;
  Vec encodeAccompPhrase(const std::vector<NoteEvent>& events, HarmonicCtxCache& cache) const;
  Vec encodePeriod(const VecSeq& phraseVecs) const;
  Vec encodeTrack(const VecSeq& phraseVecs) const;

 private:
  GruRefs melodicGruRefs(int layer) const;
  GruRefs periodGruRefs(int layer) const;
  AttnRefs attnRefs(const std::string& prefix) const;
  DenseRefs headRefs(int layer) const;

  ParamStore* store_;
  TrainConfig cfg_;
  TokenModel tokens_;
};

}  // namespace pirhdy
