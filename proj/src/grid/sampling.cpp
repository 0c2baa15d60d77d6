#include "pirhdy/grid/sampling.h"

#include <algorithm>
#include <bit>
#include <cstdlib>

#include "pirhdy/util/errors.h"

namespace pirhdy {
namespace {

int stateIndexOf(StepState state) {
  switch (state) {
    case StepState::On: return kStateOn;
    case StepState::Hold: return kStateHold;
    case StepState::Off: return kStateOff;
    case StepState::Rest: return kStateRest;
  }
  return kStateRest;
}

Phrase makePhrase(bool isMelody, int octave, int startStep, int endStep) {
  Phrase phrase;
  phrase.isMelody = isMelody;
  phrase.octave = octave;
  phrase.startStep = startStep;
  phrase.endStep = endStep;
  return phrase;
}

}  // namespace

NoteEvent melodyCellEvent(const MelodyCell& cell, int ioi, const Vocabulary& vocab) {
  NoteEvent ev;
  ev.ioi = ioi;
  if (cell.pitch < 0) return ev;  // rest defaults
  ev.chroma = vocab.chromaOf(pitchClassName(cell.pitch % 12));
  ev.octave = cell.pitch / 12;
  ev.velocity = quantizeVelocity(cell.velocity);
  ev.state = stateIndexOf(cell.state);
  return ev;
}

NoteEvent accompCellEvent(const AccompCell& cell, int octave, const Vocabulary& vocab) {
  NoteEvent ev;
  if (cell.pcMask == 0) {
    ev.octave = octave;
    return ev;
  }
  ev.chroma = vocab.chromaOf(chordSymbol(cell.pcMask));
  ev.octave = octave;
  ev.velocity = quantizeVelocity(cell.velocity);
  ev.state = stateIndexOf(cell.state);
  return ev;
}

Segmentation segmentSong(const GridSong& song, const Vocabulary& vocab,
                         const SegmentLimits& limits) {
  const int phraseSteps = 4 * song.stepsPerBar;
  const int nSteps = song.nSteps();
  Segmentation seg;

  // Melody phrases, tracking which slots survive so periods can require
  // adjacency in the original tiling.
  std::vector<bool> slotSurvived;
  for (int start = 0; start + phraseSteps <= nSteps; start += phraseSteps) {
    Phrase phrase = makePhrase(true, 0, start, start + phraseSteps);
    int valid = 0;
    for (int s = start; s < start + phraseSteps; ++s) {
      const auto& cell = song.melody[s];
      phrase.events.push_back(melodyCellEvent(cell, s - start, vocab));
      if (cell.pitch >= 0) ++valid;
    }
    phrase.validRatio = static_cast<double>(valid) / phraseSteps;
    const bool keep = phrase.validRatio >= limits.melodicValidMin;
    slotSurvived.push_back(keep);
    if (keep) seg.melody.push_back(std::move(phrase));
  }

  for (size_t i = 0; i + 1 < slotSurvived.size(); ++i)
    if (slotSurvived[i] && slotSurvived[i + 1]) ++seg.periods;
  if (seg.periods < limits.minPeriods)
    raise(ErrorCode::SongRejected,
          song.id + ": " + std::to_string(seg.periods) + " period(s), need " +
              std::to_string(limits.minPeriods));

  for (const auto& track : song.accompaniment) {
    for (int start = 0; start + phraseSteps <= nSteps; start += phraseSteps) {
      Phrase phrase = makePhrase(false, track.octave, start, start + phraseSteps);
      int valid = 0;
      for (int s = start; s < start + phraseSteps; ++s) {
        const auto& cell = track.cells[s];
        NoteEvent ev = accompCellEvent(cell, track.octave, vocab);
        ev.ioi = s - start;
        phrase.events.push_back(ev);
        if (cell.pcMask != 0) ++valid;
      }
      phrase.validRatio = static_cast<double>(valid) / phraseSteps;
      if (phrase.validRatio >= limits.harmonicValidMin)
        seg.accompaniment.push_back(std::move(phrase));
    }
  }
  return seg;
}

std::vector<LocalSample> extractLocalSamples(const GridSong& song, const Vocabulary& vocab,
                                             int wM, int wH) {
  if (wM < 1 || wH < 0) raise(ErrorCode::BadConfig, "window sizes out of range");

  std::vector<int> onSteps;
  for (int s = 0; s < song.nSteps(); ++s)
    if (song.melody[s].state == StepState::On) onSteps.push_back(s);

  std::vector<LocalSample> samples;
  for (size_t i = 0; i < onSteps.size(); ++i) {
    if (i < static_cast<size_t>(wM) || i + wM >= onSteps.size()) continue;
    const int center = onSteps[i];
    const int centerOctave = song.melody[center].pitch / 12;

    LocalSample sample;
    for (int k = -wM; k <= wM; ++k) {
      if (k == 0) continue;
      const int step = onSteps[i + k];
      sample.melodicCtx.push_back(melodyCellEvent(song.melody[step], step - center, vocab));
    }
    for (const auto& track : song.accompaniment) {
      if (std::abs(track.octave - centerOctave) > wH) continue;
      if (track.cells[center].pcMask == 0) continue;
      sample.harmonicCtx.push_back(accompCellEvent(track.cells[center], track.octave, vocab));
    }
    if (sample.harmonicCtx.empty()) continue;

    sample.candidate = melodyCellEvent(song.melody[center], 0, vocab);
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::array<LocalSample, 4> negativeSamples(const LocalSample& positive, const Vocabulary& vocab,
                                           RngStream& rng) {
  const std::array<int, 4> sizes = {static_cast<int>(vocab.chroma.size()), kNumOctaves,
                                    static_cast<int>(vocab.velocity.size()),
                                    static_cast<int>(vocab.state.size())};
  auto featureOf = [](NoteEvent& ev, int j) -> int& {
    switch (j) {
      case 0: return ev.chroma;
      case 1: return ev.octave;
      case 2: return ev.velocity;
      default: return ev.state;
    }
  };

  std::array<LocalSample, 4> negatives;
  for (int k = 1; k <= 4; ++k) {
    LocalSample neg = positive;
    // Uniform size-k subset of the four features via partial Fisher-Yates.
    std::array<int, 4> order = {0, 1, 2, 3};
    for (int j = 0; j < k; ++j) {
      const int pick = j + static_cast<int>(rng.uniformInt(4 - j));
      std::swap(order[j], order[pick]);
    }
    for (int j = 0; j < k; ++j) {
      int& value = featureOf(neg.candidate, order[j]);
      const int original = value;
      do {
        value = static_cast<int>(rng.uniformInt(sizes[order[j]]));
      } while (value == original);
      neg.labels[order[j]] = 0;
    }
    negatives[k - 1] = std::move(neg);
  }
  return negatives;
}

GlobalPairs extractGlobalPairs(const Segmentation& seg) {
  GlobalPairs pairs;
  for (size_t i = 0; i + 1 < seg.melody.size(); ++i)
    if (seg.melody[i].endStep == seg.melody[i + 1].startStep) pairs.melodic.emplace_back(i, i + 1);
  for (size_t i = 0; i < seg.melody.size(); ++i)
    for (size_t j = 0; j < seg.accompaniment.size(); ++j)
      if (seg.accompaniment[j].startStep == seg.melody[i].startStep &&
          seg.accompaniment[j].endStep == seg.melody[i].endStep)
        pairs.harmonic.emplace_back(i, j);
  return pairs;
}

}  // namespace pirhdy
