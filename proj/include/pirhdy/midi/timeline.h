#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pirhdy/midi/smf.h"
#include "pirhdy/util/rational.h"

namespace pirhdy {

/// A note in score time: whole-note units on the 1/32 grid.
struct TimedNote {
  Rational onset;
  Rational duration;
  int pitch{60};     // 0..127
  int velocity{64};  // 1..127
};

enum class KeyMode : uint8_t { Major, Minor };
enum class KeySource : uint8_t { Meta, Estimated };

struct Key {
  int tonic{0};  // pitch class 0..11
  KeyMode mode{KeyMode::Major};
  KeySource source{KeySource::Estimated};
};

struct TimedTrack {
  int trackIndex{0};  // source MTrk index
  int channel{0};     // 0-based MIDI channel
  std::vector<TimedNote> notes;
};

struct TimedSong {
  std::string id;
  std::vector<TimedTrack> tracks;
  Rational barLength{1, 1};       // from the first time signature; default 4/4
  std::optional<Key> metaKey;     // from the first key-signature meta, if any
  std::optional<Key> key;         // set once detected / normalized
  std::vector<std::string> warnings;
};

/// Convert ticks to whole-note units (ticks / (4*tpq)), snap onsets to the
/// nearest 1/32 and durations likewise with a 1/32 floor. Notes are paired
/// FIFO per (channel, pitch); each (track, channel) pair becomes one
/// TimedTrack. Throws EmptySong if no notes survive.
TimedSong normalizeTime(const MidiSong& song);

/// Key from the key-signature meta when present; otherwise a
/// Krumhansl-Schmuckler profile correlation over the duration-weighted
/// pitch-class histogram. Ties prefer the lower tonic, then major.
Key detectKey(const TimedSong& song);

/// Shift all pitches by the offset in [-6,+5] semitones that maps the tonic
/// to C (major) or A (minor); pitches clamp to [0,127].
TimedSong transposeToC(const TimedSong& song, const Key& key);

/// Index into song.tracks of the melody: the track with the highest
/// duration-weighted mean pitch, ties to the lower index. Tracks on the
/// percussion channel (10) are not candidates.
size_t selectMelodyTrack(const TimedSong& song);

/// Partition notes into per-octave sub-tracks (octave = floor(pitch/12)),
/// ascending, empty octaves omitted.
std::vector<std::pair<int, std::vector<TimedNote>>> splitByOctave(
    const std::vector<TimedNote>& notes);

}  // namespace pirhdy
