#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pirhdy/grid/grid.h"
#include "pirhdy/grid/vocabulary.h"
#include "pirhdy/util/rng.h"

namespace pirhdy {

/// The quintuple fed to the networks: inter-onset interval in 1/32 grid
/// steps (relative to a reference onset) plus vocabulary indices.
struct NoteEvent {
  int ioi{0};
  int chroma{kChromaRest};
  int octave{0};
  int velocity{kVelocityRest};
  int state{kStateRest};

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
  friend auto operator<=>(const NoteEvent&, const NoteEvent&) = default;
};

NoteEvent melodyCellEvent(const MelodyCell& cell, int ioi, const Vocabulary& vocab);
NoteEvent accompCellEvent(const AccompCell& cell, int octave, const Vocabulary& vocab);

/// Four bars of one track as a per-step event sequence (rests included),
/// IOIs relative to the phrase start.
struct Phrase {
  bool isMelody{true};
  int octave{0};  // accompaniment sub-track octave when !isMelody
  int startStep{0};
  int endStep{0};
  double validRatio{0};
  std::vector<NoteEvent> events;
};

struct Segmentation {
  std::vector<Phrase> melody;         // surviving melodic phrases, chronological
  std::vector<Phrase> accompaniment;  // surviving harmonic phrases
  int periods{0};                     // adjacent surviving melody phrase pairs
};

constexpr double kMelodicValidRatioMin = 0.75;
constexpr double kHarmonicValidRatioMin = 0.50;

struct SegmentLimits {
  double melodicValidMin = kMelodicValidRatioMin;
  double harmonicValidMin = kHarmonicValidRatioMin;
  int minPeriods = 2;
};

/// Tile each track into consecutive 4-bar phrases, drop melodic phrases
/// under the melodic valid-step ratio and harmonic under the harmonic one,
/// count periods. Throws SongRejected when fewer periods survive than the
/// limits require.
Segmentation segmentSong(const GridSong& song, const Vocabulary& vocab,
                         const SegmentLimits& limits = {});

/// One center-prediction instance: contexts, candidate, and the four
/// match labels ordered (chroma, octave, velocity, state).
struct LocalSample {
  std::vector<NoteEvent> melodicCtx;   // state=on events, ioi ascending
  std::vector<NoteEvent> harmonicCtx;  // ioi 0 by construction
  NoteEvent candidate;                 // ioi 0
  std::array<uint8_t, 4> labels{1, 1, 1, 1};
};

/// Positive samples: one per melody on-event having a full +-wM window of
/// on-events and at least one accompaniment event sounding at its onset
/// step within wH octaves.
std::vector<LocalSample> extractLocalSamples(const GridSong& song, const Vocabulary& vocab,
                                             int wM, int wH);

/// Four corruptions of one positive: level k replaces a uniform size-k
/// subset of the candidate's {chroma, octave, velocity, state} with
/// different uniform draws; label bits mark the untouched features.
std::array<LocalSample, 4> negativeSamples(const LocalSample& positive, const Vocabulary& vocab,
                                           RngStream& rng);

struct GlobalPairs {
  // Indices into Segmentation::melody / ::accompaniment.
  std::vector<std::pair<size_t, size_t>> melodic;   // (phrase, successor)
  std::vector<std::pair<size_t, size_t>> harmonic;  // (melody phrase, accomp phrase)
};

GlobalPairs extractGlobalPairs(const Segmentation& seg);

}  // namespace pirhdy
