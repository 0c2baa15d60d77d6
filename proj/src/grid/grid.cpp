#include "pirhdy/grid/grid.h"

#include <algorithm>

#include "pirhdy/util/errors.h"

namespace pirhdy {
namespace {

constexpr const char* kPitchClassNames[12] = {"C",  "C#", "D",  "D#", "E",  "F",
                                              "F#", "G",  "G#", "A",  "A#", "B"};

int stepOf(const Rational& t) {
  // Times are already on the 1/32 grid, so t*32 is integral.
  return static_cast<int>(t.num * (kStepsPerWholeNote / t.den));
}

StepState noteStateAt(int step, int startStep, int lastStep) {
  if (startStep == lastStep) return StepState::On;  // 1-step note
  if (step == startStep) return StepState::On;
  if (step == lastStep) return StepState::Off;
  return StepState::Hold;
}

}  // namespace

int quantizeVelocity(int velocity) { return std::min(velocity * 10 / 128, 9); }

const char* pitchClassName(int pc) { return kPitchClassNames[pc]; }

std::string chordSymbol(uint16_t pcMask) {
  std::string out;
  for (int pc = 0; pc < 12; ++pc) {
    if (!(pcMask & (1u << pc))) continue;
    if (!out.empty()) out += '-';
    out += kPitchClassNames[pc];
  }
  return out;
}

AccompCell chordify(const std::vector<TimedNote>& sounding, int step) {
  AccompCell cell;
  if (sounding.empty()) return cell;
  bool anyStart = false;
  bool allEnd = true;
  for (const auto& note : sounding) {
    cell.pcMask |= static_cast<uint16_t>(1u << (note.pitch % 12));
    cell.velocity = std::max(cell.velocity, note.velocity);
    const int startStep = stepOf(note.onset);
    const int lastStep = startStep + stepOf(note.duration) - 1;
    if (startStep == step) anyStart = true;
    if (lastStep != step) allEnd = false;
  }
  cell.state = anyStart ? StepState::On : (allEnd ? StepState::Off : StepState::Hold);
  return cell;
}

GridSong gridify(const TimedSong& song) {
  const Rational spbRational = song.barLength * Rational(kStepsPerWholeNote);
  if (spbRational.den != 1 || spbRational.num <= 0)
    raise(ErrorCode::UnsupportedFormat, "bar length off the 1/32 grid");
  const int stepsPerBar = static_cast<int>(spbRational.num);

  const size_t melodyIndex = selectMelodyTrack(song);
  std::vector<TimedNote> accompNotes;
  int maxEndStep = 0;
  for (size_t i = 0; i < song.tracks.size(); ++i) {
    for (const auto& note : song.tracks[i].notes) {
      maxEndStep = std::max(maxEndStep, stepOf(note.onset) + stepOf(note.duration));
      if (i != melodyIndex) accompNotes.push_back(note);
    }
  }
  const int bars = (maxEndStep + stepsPerBar - 1) / stepsPerBar;
  const int nSteps = bars * stepsPerBar;

  GridSong grid;
  grid.id = song.id;
  grid.stepsPerBar = stepsPerBar;
  grid.melody.assign(nSteps, MelodyCell{});

  // Melody: paint in ascending (pitch, onset) order so the highest pitch
  // owns each contested step.
  std::vector<TimedNote> melodyNotes = song.tracks[melodyIndex].notes;
  std::sort(melodyNotes.begin(), melodyNotes.end(), [](const TimedNote& a, const TimedNote& b) {
    if (a.pitch != b.pitch) return a.pitch < b.pitch;
    return a.onset < b.onset;
  });
  for (const auto& note : melodyNotes) {
    const int startStep = stepOf(note.onset);
    const int lastStep = startStep + stepOf(note.duration) - 1;
    for (int s = startStep; s <= lastStep; ++s)
      grid.melody[s] = MelodyCell{note.pitch, note.velocity, noteStateAt(s, startStep, lastStep)};
  }

  for (auto& [octave, notes] : splitByOctave(accompNotes)) {
    // Notes sounding per step, then chordify each occupied step.
    std::vector<std::vector<TimedNote>> sounding(nSteps);
    for (const auto& note : notes) {
      const int startStep = stepOf(note.onset);
      const int lastStep = startStep + stepOf(note.duration) - 1;
      for (int s = startStep; s <= lastStep; ++s) sounding[s].push_back(note);
    }
    AccompTrack track;
    track.octave = octave;
    track.cells.resize(nSteps);
    for (int s = 0; s < nSteps; ++s)
      if (!sounding[s].empty()) track.cells[s] = chordify(sounding[s], s);
    grid.accompaniment.push_back(std::move(track));
  }
  return grid;
}

}  // namespace pirhdy
