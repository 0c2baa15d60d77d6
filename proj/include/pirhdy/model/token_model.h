#pragma once

#include "pirhdy/grid/sampling.h"
#include "pirhdy/nn/ops.h"
#include "pirhdy/nn/param_store.h"
#include "pirhdy/util/rng.h"

namespace pirhdy {

/// Which event features participate in token fusion. Octave is a modifier
/// on the chroma segment rather than a segment of its own.
struct FeatureMask {
  bool chroma = true;
  bool octave = true;
  bool ioi = true;
  bool state = true;
  bool velocity = true;
};

struct TokenConfig {
  int d = 0;            // embedding width
  int chromaCount = 0;  // chroma vocabulary size incl. rest and chords
  FeatureMask features;
};

struct TokenCache {
  DenseCache dense;
  int chroma = 0;
  int octave = 0;
  int velocity = 0;
  int state = 0;
  bool melodic = true;
};

/// Embeds one grid event into a d-vector: pitch = chroma row + octave *
/// (mean of the 12 pitch-class rows), fused with interval, dynamics, and
/// state segments through a tanh dense layer. Melodic fusion includes the
/// trigonometric interval encoding; harmonic fusion omits it.
class TokenModel {
 public:
  /// Adds the model's parameters to the store, or, when they already
  /// exist (a loaded checkpoint), validates their shapes against cfg.
  TokenModel(ParamStore& store, const TokenConfig& cfg, RngStream* rng);

  int d() const { return cfg_.d; }
  const TokenConfig& config() const { return cfg_; }
  int melodicInputDim() const;
  int harmonicInputDim() const;

  /// Mean of chroma rows 0-11, recomputed from current parameters.
  Vec octaveBase() const;
  /// chroma row + octave * octaveBase(). Octave must lie in [0, 10].
  Vec pitchRepr(int chroma, int octave) const;

  Vec embed(const NoteEvent& e, bool melodic, TokenCache& cache) const;
  /// Distributes dOut through the fusion layer into table gradients.
  void embedBackward(const Vec& dOut, const TokenCache& cache) const;

 private:
  DenseRefs fusionRefs(bool melodic) const;

  ParamStore* store_;
  TokenConfig cfg_;
};

}  // namespace pirhdy
