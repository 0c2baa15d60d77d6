#pragma once

// Synthetic sample/pair factories shared by the model-level tests.

#include <vector>

#include "pirhdy/grid/corpus_io.h"
#include "pirhdy/grid/sampling.h"
#include "pirhdy/grid/vocabulary.h"
#include "pirhdy/util/rng.h"

namespace pirhdy::testsupport {

inline NoteEvent randomOnEvent(RngStream& rng, int ioi) {
  NoteEvent e;
  e.ioi = ioi;
  e.chroma = static_cast<int>(rng.uniformInt(13));
  e.octave = static_cast<int>(rng.uniformInt(kNumOctaves));
  e.velocity = static_cast<int>(rng.uniformInt(10));
  e.state = kStateOn;
  return e;
}

/// Groups of positive + 4 negatives with plausible window structure: two
/// melodic neighbors around the center and one sounding chord. The
/// following event and the chord share the center's features, so the true
/// labels are a learnable function of either context rather than rote
/// group memorization.
inline std::vector<LocalSample> makeLocalGroups(size_t nGroups, uint64_t seed) {
  Vocabulary vocab;
  RngStream rng(seed);
  std::vector<LocalSample> records;
  records.reserve(nGroups * 5);
  for (size_t g = 0; g < nGroups; ++g) {
    const NoteEvent base = randomOnEvent(rng, 0);
    NoteEvent next = base;
    next.ioi = 1 + static_cast<int>(rng.uniformInt(8));

    LocalSample positive;
    positive.melodicCtx = {randomOnEvent(rng, -1 - static_cast<int>(rng.uniformInt(8))),
                           next};
    positive.harmonicCtx = {base};
    positive.candidate = base;
    const auto negatives = negativeSamples(positive, vocab, rng);
    records.push_back(positive);
    records.insert(records.end(), negatives.begin(), negatives.end());
  }
  return records;
}

/// Random melody-like phrase: alternating on/hold events on the step grid.
inline std::vector<NoteEvent> randomPhrase(RngStream& rng, int steps) {
  std::vector<NoteEvent> events;
  events.reserve(static_cast<size_t>(steps));
  NoteEvent current;
  for (int s = 0; s < steps; ++s) {
    if (s % 4 == 0) current = randomOnEvent(rng, 0);
    NoteEvent e = current;
    e.ioi = s;
    e.state = s % 4 == 0 ? kStateOn : (s % 4 == 3 ? kStateOff : kStateHold);
    events.push_back(e);
  }
  return events;
}

inline PairCorpus makePairCorpus(size_t nPairs, uint64_t seed, int steps = 8) {
  PairCorpus corpus;
  corpus.vocabHash = 0;
  RngStream rng(seed);
  for (size_t i = 0; i < nPairs; ++i) {
    PairRecord rec;
    rec.songIndex = static_cast<uint32_t>(i);
    rec.a = randomPhrase(rng, steps);
    rec.b = randomPhrase(rng, steps);
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

}  // namespace pirhdy::testsupport
