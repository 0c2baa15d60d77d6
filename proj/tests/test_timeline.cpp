#include "doctest.h"

#include <algorithm>

#include "pirhdy/midi/timeline.h"
#include "pirhdy/util/errors.h"
#include "pirhdy/util/rng.h"
#include "support/smf_builder.h"

using namespace pirhdy;
using testsupport::TrackBuilder;
using testsupport::buildSmf;

namespace {

TimedSong songFromNotes(const std::vector<TimedNote>& notes, int channel = 0) {
  TimedSong song;
  TimedTrack track;
  track.channel = channel;
  track.notes = notes;
  song.tracks.push_back(track);
  return song;
}

TimedNote note(Rational onset, Rational duration, int pitch, int velocity = 64) {
  return TimedNote{onset, duration, pitch, velocity};
}

}  // namespace

TEST_CASE("tick-to-whole-note conversion") {
  TrackBuilder t;
  t.noteOn(480, 0, 60, 64).noteOff(480, 0, 60).endOfTrack();
  const auto timed = normalizeTime(parseSmf(buildSmf(0, 480, {t})));

  REQUIRE(timed.tracks.size() == 1);
  REQUIRE(timed.tracks[0].notes.size() == 1);
  CHECK(timed.tracks[0].notes[0].onset == Rational(1, 4));
  CHECK(timed.tracks[0].notes[0].duration == Rational(1, 4));
}

TEST_CASE("short durations floor to 1/32") {
  TrackBuilder t;
  t.noteOn(0, 0, 60, 64).noteOff(10, 0, 60).endOfTrack();
  const auto timed = normalizeTime(parseSmf(buildSmf(0, 480, {t})));
  CHECK(timed.tracks[0].notes[0].duration == Rational(1, 32));
}

TEST_CASE("onsets snap to the nearest 1/32") {
  TrackBuilder t;
  // 70 ticks at tpq 480 = 70/1920 whole notes = 1.1667/32; nearest is 1/32.
  t.noteOn(70, 0, 60, 64).noteOff(480, 0, 60).endOfTrack();
  const auto timed = normalizeTime(parseSmf(buildSmf(0, 480, {t})));
  CHECK(timed.tracks[0].notes[0].onset == Rational(1, 32));
}

TEST_CASE("time signature meta sets bar length") {
  TrackBuilder t;
  t.timeSignature(0, 3, 2).noteOn(0, 0, 60, 64).noteOff(480, 0, 60).endOfTrack();
  const auto timed = normalizeTime(parseSmf(buildSmf(0, 480, {t})));
  CHECK(timed.barLength == Rational(3, 4));
}

TEST_CASE("default bar length is one whole note") {
  TrackBuilder t;
  t.noteOn(0, 0, 60, 64).noteOff(480, 0, 60).endOfTrack();
  const auto timed = normalizeTime(parseSmf(buildSmf(0, 480, {t})));
  CHECK(timed.barLength == Rational(1, 1));
}

TEST_CASE("empty song is rejected") {
  TrackBuilder t;
  t.tempo(0, 500000).endOfTrack();
  try {
    normalizeTime(parseSmf(buildSmf(0, 480, {t})));
    FAIL("expected EmptySong");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySong);
  }
}

TEST_CASE("channels split into separate timed tracks") {
  TrackBuilder t;
  t.noteOn(0, 0, 72, 64).noteOn(0, 1, 48, 60);
  t.noteOff(480, 0, 72).noteOff(0, 1, 48).endOfTrack();
  const auto timed = normalizeTime(parseSmf(buildSmf(0, 480, {t})));

  REQUIRE(timed.tracks.size() == 2);
  CHECK(timed.tracks[0].channel == 0);
  CHECK(timed.tracks[0].notes[0].pitch == 72);
  CHECK(timed.tracks[1].channel == 1);
  CHECK(timed.tracks[1].notes[0].pitch == 48);
}

TEST_CASE("overlapping same-pitch notes pair first-in-first-out") {
  TrackBuilder t;
  t.noteOn(0, 0, 60, 64).noteOn(240, 0, 60, 70);
  t.noteOff(240, 0, 60).noteOff(480, 0, 60).endOfTrack();
  const auto timed = normalizeTime(parseSmf(buildSmf(0, 480, {t})));

  const auto& notes = timed.tracks[0].notes;
  REQUIRE(notes.size() == 2);
  // First on (tick 0, vel 64) closes at tick 480 = 1/4 whole.
  CHECK(notes[0].onset == Rational(0));
  CHECK(notes[0].duration == Rational(1, 4));
  CHECK(notes[0].velocity == 64);
  // Second on (tick 240, vel 70) closes at tick 960.
  CHECK(notes[1].onset == Rational(1, 8));
  CHECK(notes[1].duration == Rational(3, 8));
  CHECK(notes[1].velocity == 70);
}

TEST_CASE("normalization is deterministic") {
  TrackBuilder t;
  t.timeSignature(0, 4, 2).noteOn(17, 0, 61, 90).noteOff(233, 0, 61);
  t.noteOn(99, 1, 40, 33).noteOff(501, 1, 40).endOfTrack();
  const auto bytes = buildSmf(0, 480, {t});
  const auto a = normalizeTime(parseSmf(bytes));
  const auto b = normalizeTime(parseSmf(bytes));

  REQUIRE(a.tracks.size() == b.tracks.size());
  for (size_t i = 0; i < a.tracks.size(); ++i) {
    REQUIRE(a.tracks[i].notes.size() == b.tracks[i].notes.size());
    for (size_t j = 0; j < a.tracks[i].notes.size(); ++j) {
      CHECK(a.tracks[i].notes[j].onset == b.tracks[i].notes[j].onset);
      CHECK(a.tracks[i].notes[j].duration == b.tracks[i].notes[j].duration);
      CHECK(a.tracks[i].notes[j].pitch == b.tracks[i].notes[j].pitch);
    }
  }
}

TEST_CASE("all times land on the 1/32 grid") {
  RngStream rng(7);
  TrackBuilder t;
  int pitch = 60;
  for (int i = 0; i < 40; ++i) {
    const uint32_t delta = static_cast<uint32_t>(rng.uniformInt(700));
    const uint32_t len = 1 + static_cast<uint32_t>(rng.uniformInt(900));
    t.noteOn(delta, 0, pitch, 64).noteOff(len, 0, pitch);
    pitch = 60 + (pitch + 7) % 12;
  }
  t.endOfTrack();
  const auto timed = normalizeTime(parseSmf(buildSmf(0, 384, {t})));
  for (const auto& track : timed.tracks)
    for (const auto& n : track.notes) {
      CHECK(32 % n.onset.den == 0);
      CHECK(32 % n.duration.den == 0);
      CHECK(n.duration >= Rational(1, 32));
    }
}

TEST_CASE("key signature metas map through the circle of fifths") {
  auto keyOf = [](int8_t sharps, bool minor) {
    TrackBuilder t;
    t.keySignature(0, sharps, minor).noteOn(0, 0, 60, 64).noteOff(480, 0, 60).endOfTrack();
    const auto timed = normalizeTime(parseSmf(buildSmf(0, 480, {t})));
    return detectKey(timed);
  };

  const Key c = keyOf(0, false);
  CHECK(c.tonic == 0);
  CHECK(c.mode == KeyMode::Major);
  CHECK(c.source == KeySource::Meta);

  CHECK(keyOf(1, false).tonic == 7);    // G major
  CHECK(keyOf(-1, false).tonic == 5);   // F major
  CHECK(keyOf(2, false).tonic == 2);    // D major
  CHECK(keyOf(0, true).tonic == 9);     // A minor
  CHECK(keyOf(1, true).tonic == 4);     // E minor
  CHECK(keyOf(-1, true).tonic == 2);    // D minor
  CHECK(keyOf(0, true).mode == KeyMode::Minor);
}

TEST_CASE("estimated key: G major scale with G emphasized") {
  // Durations: G 4 quarters, D 2, the rest 1 each. Expected winner computed
  // offline over all 24 profile rotations: G major, r = 0.9445.
  std::vector<TimedNote> notes;
  Rational cursor{0};
  auto add = [&](int pitch, int quarters) {
    notes.push_back(note(cursor, Rational(quarters, 4), pitch));
    cursor = cursor + Rational(quarters, 4);
  };
  add(67, 4);  // G
  add(69, 1);  // A
  add(71, 1);  // B
  add(60, 1);  // C
  add(62, 2);  // D
  add(64, 1);  // E
  add(66, 1);  // F#
  const Key key = detectKey(songFromNotes(notes));
  CHECK(key.tonic == 7);
  CHECK(key.mode == KeyMode::Major);
  CHECK(key.source == KeySource::Estimated);
}

TEST_CASE("estimated key: single C note") {
  // One-bin histogram at C. Offline argmax: C major r = 0.68447, narrowly
  // over C minor r = 0.68419.
  const Key key = detectKey(songFromNotes({note(Rational(0), Rational(1, 4), 60)}));
  CHECK(key.tonic == 0);
  CHECK(key.mode == KeyMode::Major);
}

TEST_CASE("estimated key: natural minor profile") {
  // A 4, C 2, E 2, others 1 over the A natural minor scale. Offline argmax:
  // A minor, r = 0.9648.
  std::vector<TimedNote> notes;
  Rational cursor{0};
  auto add = [&](int pitch, int quarters) {
    notes.push_back(note(cursor, Rational(quarters, 4), pitch));
    cursor = cursor + Rational(quarters, 4);
  };
  add(69, 4);  // A
  add(71, 1);  // B
  add(72, 2);  // C
  add(74, 1);  // D
  add(76, 2);  // E
  add(77, 1);  // F
  add(79, 1);  // G
  const Key key = detectKey(songFromNotes(notes));
  CHECK(key.tonic == 9);
  CHECK(key.mode == KeyMode::Minor);
}

TEST_CASE("estimated key: uniform histogram falls back to C major by tie-break") {
  std::vector<TimedNote> notes;
  for (int pc = 0; pc < 12; ++pc) notes.push_back(note(Rational(pc, 4), Rational(1, 4), 60 + pc));
  const Key key = detectKey(songFromNotes(notes));
  CHECK(key.tonic == 0);
  CHECK(key.mode == KeyMode::Major);
}

TEST_CASE("transposition offsets stay within [-6,+5]") {
  for (int tonic = 0; tonic < 12; ++tonic) {
    for (const KeyMode mode : {KeyMode::Major, KeyMode::Minor}) {
      const int base = 60;
      auto song = songFromNotes({note(Rational(0), Rational(1, 4), base)});
      const auto out = transposeToC(song, Key{tonic, mode, KeySource::Meta});
      const int offset = out.tracks[0].notes[0].pitch - base;
      CHECK(offset >= -6);
      CHECK(offset <= 5);
      const int target = mode == KeyMode::Major ? 0 : 9;
      CHECK(((tonic + offset) % 12 + 12) % 12 == target);
      REQUIRE(out.key.has_value());
      CHECK(out.key->tonic == target);
    }
  }
}

TEST_CASE("G major transposes up a fourth: G4 becomes C5") {
  auto song = songFromNotes({note(Rational(0), Rational(1, 4), 67)});
  const auto out = transposeToC(song, Key{7, KeyMode::Major, KeySource::Meta});
  CHECK(out.tracks[0].notes[0].pitch == 72);
}

TEST_CASE("C major and A minor transpose to identity") {
  auto song = songFromNotes({note(Rational(0), Rational(1, 4), 65)});
  CHECK(transposeToC(song, Key{0, KeyMode::Major, KeySource::Meta}).tracks[0].notes[0].pitch == 65);
  CHECK(transposeToC(song, Key{9, KeyMode::Minor, KeySource::Meta}).tracks[0].notes[0].pitch == 65);
}

TEST_CASE("transposed pitches clamp to the MIDI range") {
  auto song = songFromNotes({note(Rational(0), Rational(1, 4), 2),
                             note(Rational(1, 4), Rational(1, 4), 126)});
  const auto down = transposeToC(song, Key{5, KeyMode::Major, KeySource::Meta});  // offset -5
  CHECK(down.tracks[0].notes[0].pitch == 0);
  const auto up = transposeToC(song, Key{7, KeyMode::Major, KeySource::Meta});  // offset +5
  CHECK(up.tracks[0].notes[1].pitch == 127);
}

TEST_CASE("melody is the track with the highest duration-weighted mean pitch") {
  TimedSong song;
  TimedTrack low, high;
  low.trackIndex = 0;
  low.notes = {note(Rational(0), Rational(1, 2), 50)};
  high.trackIndex = 1;
  high.notes = {note(Rational(0), Rational(1, 2), 70)};
  song.tracks = {low, high};
  CHECK(selectMelodyTrack(song) == 1);

  // Duration weighting: short high note loses to long medium notes.
  TimedSong weighted;
  TimedTrack spike, sustained;
  spike.notes = {note(Rational(0), Rational(1, 32), 100), note(Rational(1, 32), Rational(1, 1), 50)};
  sustained.notes = {note(Rational(0), Rational(1, 1), 60)};
  weighted.tracks = {spike, sustained};
  // spike mean = (100/32 + 50)/(1/32 + 1) = 53.125/1.03125 ~ 51.5 < 60.
  CHECK(selectMelodyTrack(weighted) == 1);
}

TEST_CASE("melody selection ties break to the lower track index") {
  TimedSong song;
  TimedTrack a, b;
  a.notes = {note(Rational(0), Rational(1, 4), 60)};
  b.notes = {note(Rational(0), Rational(1, 2), 60)};
  song.tracks = {a, b};
  CHECK(selectMelodyTrack(song) == 0);
}

TEST_CASE("percussion channel is never the melody") {
  TimedSong song;
  TimedTrack drums, pad;
  drums.channel = 9;
  drums.notes = {note(Rational(0), Rational(1, 4), 100)};
  pad.channel = 0;
  pad.notes = {note(Rational(0), Rational(1, 4), 40)};
  song.tracks = {drums, pad};
  CHECK(selectMelodyTrack(song) == 1);
}

TEST_CASE("single non-empty track is the melody") {
  TimedSong song;
  TimedTrack empty, only;
  only.notes = {note(Rational(0), Rational(1, 4), 55)};
  song.tracks = {empty, only};
  CHECK(selectMelodyTrack(song) == 1);
}

TEST_CASE("octave split partitions and orders sub-tracks") {
  std::vector<TimedNote> notes = {note(Rational(0), Rational(1, 4), 60),
                                  note(Rational(0), Rational(1, 4), 64),
                                  note(Rational(0), Rational(1, 4), 36)};
  const auto subs = splitByOctave(notes);
  REQUIRE(subs.size() == 2);
  CHECK(subs[0].first == 3);
  REQUIRE(subs[0].second.size() == 1);
  CHECK(subs[0].second[0].pitch == 36);
  CHECK(subs[1].first == 5);
  CHECK(subs[1].second.size() == 2);

  CHECK(splitByOctave({}).empty());

  const auto one = splitByOctave({note(Rational(0), Rational(1, 4), 61),
                                  note(Rational(1, 4), Rational(1, 4), 71)});
  REQUIRE(one.size() == 1);
  CHECK(one[0].first == 5);
  CHECK(one[0].second.size() == 2);
}

TEST_CASE("octave split preserves the note multiset") {
  RngStream rng(11);
  std::vector<TimedNote> notes;
  for (int i = 0; i < 200; ++i)
    notes.push_back(note(Rational(i, 32), Rational(1 + rng.uniformInt(8), 32),
                         static_cast<int>(rng.uniformInt(128)),
                         1 + static_cast<int>(rng.uniformInt(127))));
  const auto subs = splitByOctave(notes);
  size_t total = 0;
  std::vector<int> seen;
  for (const auto& [octave, bucket] : subs) {
    total += bucket.size();
    for (const auto& n : bucket) {
      CHECK(n.pitch / 12 == octave);
      seen.push_back(n.pitch);
    }
  }
  CHECK(total == notes.size());
  std::vector<int> expected;
  for (const auto& n : notes) expected.push_back(n.pitch);
  std::sort(seen.begin(), seen.end());
  std::sort(expected.begin(), expected.end());
  CHECK(seen == expected);
}
