#include "pirhdy/midi/timeline.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>

#include "pirhdy/util/errors.h"

namespace pirhdy {
namespace {

const Rational kGridStep{1, 32};

/// Krumhansl-Kessler probe-tone profiles, tonic first.
constexpr std::array<double, 12> kMajorProfile = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                                  2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
constexpr std::array<double, 12> kMinorProfile = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                                  2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

double pearson(const std::array<double, 12>& x, const std::array<double, 12>& y) {
  double mx = 0, my = 0;
  for (int i = 0; i < 12; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= 12;
  my /= 12;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 12; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

Key keyFromSignature(int sharps, bool minor) {
  // Circle of fifths: each sharp raises the tonic a fifth from C (major)
  // or A (minor).
  const int base = minor ? 9 : 0;
  return Key{((sharps * 7) % 12 + 12 + base) % 12, minor ? KeyMode::Minor : KeyMode::Major,
             KeySource::Meta};
}

}  // namespace

TimedSong normalizeTime(const MidiSong& song) {
  if (song.ticksPerQuarter <= 0) raise(ErrorCode::BadFile, "non-positive ticks per quarter");
  const int64_t ticksPerWhole = 4LL * song.ticksPerQuarter;

  TimedSong out;
  out.id = song.sourcePath;
  out.warnings = song.warnings;

  // First time-signature and key-signature metas win, earliest tick first,
  // then track order.
  int64_t bestTsTick = -1, bestKsTick = -1;
  for (const auto& track : song.tracks) {
    for (const auto& ev : track.events) {
      if (ev.type == MidiEventType::TimeSignature && (bestTsTick < 0 || ev.tick < bestTsTick)) {
        bestTsTick = ev.tick;
        if (ev.tsDenominator == 0) raise(ErrorCode::BadFile, "zero time-signature denominator");
        out.barLength = Rational(ev.tsNumerator, ev.tsDenominator);
      } else if (ev.type == MidiEventType::KeySignature && (bestKsTick < 0 || ev.tick < bestKsTick)) {
        bestKsTick = ev.tick;
        out.metaKey = keyFromSignature(ev.keySharps, ev.keyMinor);
      }
    }
  }
  if (out.barLength.num <= 0) raise(ErrorCode::BadFile, "non-positive bar length");

  for (size_t ti = 0; ti < song.tracks.size(); ++ti) {
    // FIFO pairing per (channel, pitch); one output track per channel used.
    std::map<std::pair<int, int>, std::deque<const MidiEvent*>> pending;
    std::map<int, std::vector<TimedNote>> perChannel;
    for (const auto& ev : song.tracks[ti].events) {
      if (ev.type == MidiEventType::NoteOn) {
        pending[{ev.channel, ev.pitch}].push_back(&ev);
      } else if (ev.type == MidiEventType::NoteOff) {
        auto it = pending.find({ev.channel, ev.pitch});
        if (it == pending.end() || it->second.empty()) continue;  // unmatched off, ignore
        const MidiEvent* on = it->second.front();
        it->second.pop_front();
        TimedNote note;
        note.onset = snapToGrid32(Rational(on->tick, ticksPerWhole));
        note.duration = snapToGrid32(Rational(ev.tick - on->tick, ticksPerWhole));
        if (note.duration < kGridStep) note.duration = kGridStep;
        note.pitch = on->pitch;
        note.velocity = on->velocity;
        perChannel[ev.channel].push_back(note);
      }
    }
    for (auto& [channel, notes] : perChannel) {
      std::sort(notes.begin(), notes.end(), [](const TimedNote& a, const TimedNote& b) {
        if (a.onset != b.onset) return a.onset < b.onset;
        return a.pitch < b.pitch;
      });
      TimedTrack track;
      track.trackIndex = static_cast<int>(ti);
      track.channel = channel;
      track.notes = std::move(notes);
      out.tracks.push_back(std::move(track));
    }
  }

  size_t total = 0;
  for (const auto& t : out.tracks) total += t.notes.size();
  if (total == 0) raise(ErrorCode::EmptySong, "no notes in " + song.sourcePath);
  return out;
}

Key detectKey(const TimedSong& song) {
  if (song.metaKey) return *song.metaKey;

  std::array<double, 12> histogram{};
  size_t count = 0;
  for (const auto& track : song.tracks) {
    for (const auto& note : track.notes) {
      histogram[note.pitch % 12] += note.duration.toDouble();
      ++count;
    }
  }
  if (count == 0) raise(ErrorCode::EmptySong, "no notes to estimate a key from");

  Key best;
  double bestScore = -2;
  for (int tonic = 0; tonic < 12; ++tonic) {
    for (const KeyMode mode : {KeyMode::Major, KeyMode::Minor}) {
      const auto& profile = mode == KeyMode::Major ? kMajorProfile : kMinorProfile;
      std::array<double, 12> rotated;
      for (int pc = 0; pc < 12; ++pc) rotated[pc] = profile[(pc - tonic + 12) % 12];
      const double score = pearson(histogram, rotated);
      if (score > bestScore) {
        bestScore = score;
        best = Key{tonic, mode, KeySource::Estimated};
      }
    }
  }
  return best;
}

TimedSong transposeToC(const TimedSong& song, const Key& key) {
  if (key.tonic < 0 || key.tonic > 11) raise(ErrorCode::BadConfig, "tonic out of range");
  const int target = key.mode == KeyMode::Major ? 0 : 9;
  const int offset = ((target - key.tonic + 6) % 12 + 12) % 12 - 6;

  TimedSong out = song;
  for (auto& track : out.tracks)
    for (auto& note : track.notes) note.pitch = std::clamp(note.pitch + offset, 0, 127);
  out.key = Key{target, key.mode, key.source};
  return out;
}

size_t selectMelodyTrack(const TimedSong& song) {
  // Duration-weighted mean pitch, compared exactly: meanA > meanB iff
  // sumA*totB > sumB*totA (denominators all positive).
  bool found = false;
  size_t bestIndex = 0;
  Rational bestSum{0}, bestTot{0};
  for (size_t i = 0; i < song.tracks.size(); ++i) {
    const auto& track = song.tracks[i];
    if (track.channel == 9 || track.notes.empty()) continue;  // percussion / empty
    Rational sum{0}, tot{0};
    for (const auto& note : track.notes) {
      sum = sum + Rational(note.duration.num * note.pitch, note.duration.den);
      tot = tot + note.duration;
    }
    if (!found || sum * bestTot > bestSum * tot) {
      found = true;
      bestIndex = i;
      bestSum = sum;
      bestTot = tot;
    }
  }
  if (!found) raise(ErrorCode::EmptySong, "no melody candidate track");
  return bestIndex;
}

std::vector<std::pair<int, std::vector<TimedNote>>> splitByOctave(
    const std::vector<TimedNote>& notes) {
  std::map<int, std::vector<TimedNote>> buckets;
  for (const auto& note : notes) buckets[note.pitch / 12].push_back(note);
  std::vector<std::pair<int, std::vector<TimedNote>>> out;
  out.reserve(buckets.size());
  for (auto& [octave, bucket] : buckets) out.emplace_back(octave, std::move(bucket));
  return out;
}

}  // namespace pirhdy
