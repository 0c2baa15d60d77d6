#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pirhdy {

enum class MidiEventType : uint8_t {
  NoteOn,
  NoteOff,
  Tempo,
  TimeSignature,
  KeySignature,
};

/// One extracted event with absolute tick time. Only the fields relevant to
/// its type are meaningful; the rest stay at their defaults.
struct MidiEvent {
  MidiEventType type{MidiEventType::NoteOn};
  int64_t tick{0};
  uint8_t channel{0};
  uint8_t pitch{0};
  uint8_t velocity{0};
  uint32_t usPerQuarter{500000};  // Tempo
  uint8_t tsNumerator{4};         // TimeSignature
  uint8_t tsDenominator{4};
  int8_t keySharps{0};  // KeySignature: -7 flats .. +7 sharps
  bool keyMinor{false};
};

struct MidiTrack {
  std::vector<MidiEvent> events;
};

struct MidiSong {
  int format{0};  // 0 or 1
  int ticksPerQuarter{480};
  std::vector<MidiTrack> tracks;
  std::string sourcePath;
  std::vector<std::string> warnings;
};

/// Parse a Standard MIDI File. Accepts formats 0 and 1 with PPQN division.
/// Note-ons with velocity 0 become note-offs; running status is honored.
/// Note-ons still open at end of track are closed there with a warning.
/// Throws MalformedHeader, UnsupportedFormat, or TruncatedChunk.
MidiSong parseSmf(const std::vector<uint8_t>& bytes, const std::string& sourcePath = "");

/// Read a .mid file from disk and parse it.
MidiSong readSmfFile(const std::string& path);

}  // namespace pirhdy
