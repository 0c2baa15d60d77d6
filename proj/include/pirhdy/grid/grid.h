#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pirhdy/midi/timeline.h"

namespace pirhdy {

constexpr int kStepsPerWholeNote = 32;

enum class StepState : uint8_t { On, Hold, Off, Rest };

/// Melody grid cell; pitch -1 marks a rest. Velocity stays raw (0..127)
/// until events are built against a vocabulary.
struct MelodyCell {
  int pitch{-1};
  int velocity{0};
  StepState state{StepState::Rest};
};

/// One step of an accompaniment octave sub-track: the sounding pitch
/// classes as a bitmask (bit pc set), loudest raw velocity, joint state.
struct AccompCell {
  uint16_t pcMask{0};
  int velocity{0};
  StepState state{StepState::Rest};
};

struct AccompTrack {
  int octave{0};
  std::vector<AccompCell> cells;
};

struct GridSong {
  std::string id;
  int stepsPerBar{kStepsPerWholeNote};
  std::vector<MelodyCell> melody;
  std::vector<AccompTrack> accompaniment;

  int nSteps() const { return static_cast<int>(melody.size()); }
};

/// Velocity class 0..9 (pppp..ffff): min(floor(v*10/128), 9).
int quantizeVelocity(int velocity);

/// "C", "C#", ..., "B" for pc 0..11.
const char* pitchClassName(int pc);

/// Canonical chord symbol: ascending pitch-class names joined by "-",
/// e.g. mask{D,F,B} -> "D-F-B". A single pc yields its plain name.
std::string chordSymbol(uint16_t pcMask);

/// Combine the notes of one octave sub-track sounding on one grid step:
/// pcMask of all constituents, loudest velocity, state on if any constituent
/// starts at this step, off if all of them end here, else hold.
AccompCell chordify(const std::vector<TimedNote>& sounding, int step);

/// Rasterize a normalized song onto the 1/32 grid: melody cells (highest
/// pitch wins a contested step) plus accompaniment sub-tracks per octave.
/// The grid is padded to whole bars; all tracks share one length.
GridSong gridify(const TimedSong& song);

}  // namespace pirhdy
