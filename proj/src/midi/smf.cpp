#include "pirhdy/midi/smf.h"

#include <fstream>
#include <map>
#include <utility>

#include "pirhdy/util/errors.h"

namespace pirhdy {
namespace {

/// Big-endian cursor over the raw file bytes.
class SmfCursor {
 public:
  SmfCursor(const uint8_t* data, size_t size) : data_(data), size_(size) {}

  size_t pos() const { return pos_; }
  size_t remaining() const { return size_ - pos_; }

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  uint16_t u16be() {
    need(2);
    uint16_t v = static_cast<uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  uint32_t u32be() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
  }
  /// Variable-length quantity, at most 4 bytes per the SMF spec.
  uint32_t vlq() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const uint8_t b = u8();
      v = (v << 7) | (b & 0x7f);
      if (!(b & 0x80)) return v;
    }
    raise(ErrorCode::TruncatedChunk, "variable-length quantity longer than 4 bytes");
  }
  void skip(size_t n) {
    need(n);
    pos_ += n;
  }
  std::string tag() {
    need(4);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), 4);
    pos_ += 4;
    return s;
  }

 private:
  void need(size_t n) const {
    if (pos_ + n > size_) raise(ErrorCode::TruncatedChunk, "unexpected end of file");
  }

  const uint8_t* data_;
  size_t size_;
  size_t pos_{0};
};

MidiTrack parseTrack(SmfCursor& cur, size_t length, std::vector<std::string>& warnings,
                     int trackIndex) {
  const size_t end = cur.pos() + length;
  MidiTrack track;
  int64_t tick = 0;
  uint8_t runningStatus = 0;
  // Open note-ons per (channel, pitch), counted so overlapping unisons survive.
  std::map<std::pair<uint8_t, uint8_t>, int> open;

  auto pushNote = [&](MidiEventType type, uint8_t channel, uint8_t pitch, uint8_t velocity) {
    MidiEvent ev;
    ev.type = type;
    ev.tick = tick;
    ev.channel = channel;
    ev.pitch = pitch;
    ev.velocity = velocity;
    track.events.push_back(ev);
  };
  auto noteOff = [&](uint8_t channel, uint8_t pitch) {
    pushNote(MidiEventType::NoteOff, channel, pitch, 0);
    auto it = open.find({channel, pitch});
    if (it != open.end() && --it->second == 0) open.erase(it);
  };

  while (cur.pos() < end) {
    tick += cur.vlq();
    if (cur.pos() >= end) raise(ErrorCode::TruncatedChunk, "delta time with no event");

    uint8_t status = cur.u8();
    bool havePre = false;
    uint8_t preData = 0;
    if (status < 0x80) {
      if (runningStatus < 0x80)
        raise(ErrorCode::TruncatedChunk, "data byte with no running status");
      preData = status;
      havePre = true;
      status = runningStatus;
    }
    auto data = [&]() -> uint8_t {
      if (havePre) {
        havePre = false;
        return preData;
      }
      return cur.u8();
    };

    if (status >= 0xf0) {
      runningStatus = 0;  // meta and sysex cancel running status
      if (status == 0xff) {
        const uint8_t metaType = cur.u8();
        const uint32_t len = cur.vlq();
        if (cur.pos() + len > end) raise(ErrorCode::TruncatedChunk, "meta event past track end");
        MidiEvent ev;
        ev.tick = tick;
        switch (metaType) {
          case 0x51:
            if (len != 3) raise(ErrorCode::TruncatedChunk, "tempo meta with bad length");
            ev.type = MidiEventType::Tempo;
            ev.usPerQuarter = (static_cast<uint32_t>(cur.u8()) << 16);
            ev.usPerQuarter |= (static_cast<uint32_t>(cur.u8()) << 8);
            ev.usPerQuarter |= cur.u8();
            track.events.push_back(ev);
            break;
          case 0x58: {
            if (len != 4) raise(ErrorCode::TruncatedChunk, "time signature meta with bad length");
            ev.type = MidiEventType::TimeSignature;
            ev.tsNumerator = cur.u8();
            const uint8_t dd = cur.u8();
            ev.tsDenominator = static_cast<uint8_t>(1u << dd);
            cur.skip(2);  // clocks per click, 32nds per quarter
            track.events.push_back(ev);
            break;
          }
          case 0x59:
            if (len != 2) raise(ErrorCode::TruncatedChunk, "key signature meta with bad length");
            ev.type = MidiEventType::KeySignature;
            ev.keySharps = static_cast<int8_t>(cur.u8());
            ev.keyMinor = cur.u8() != 0;
            track.events.push_back(ev);
            break;
          default:
            cur.skip(len);
            break;
        }
        if (metaType == 0x2f) break;  // end of track
      } else if (status == 0xf0 || status == 0xf7) {
        cur.skip(cur.vlq());
      } else {
        raise(ErrorCode::TruncatedChunk, "unexpected system message in file");
      }
      continue;
    }

    runningStatus = status;
    const uint8_t channel = status & 0x0f;
    switch (status & 0xf0) {
      case 0x90: {
        const uint8_t pitch = data();
        const uint8_t velocity = data();
        if (velocity == 0) {
          noteOff(channel, pitch);
        } else {
          pushNote(MidiEventType::NoteOn, channel, pitch, velocity);
          ++open[{channel, pitch}];
        }
        break;
      }
      case 0x80:
        noteOff(channel, data());
        data();  // release velocity, unused
        break;
      case 0xa0:  // polyphonic pressure
      case 0xb0:  // controller
      case 0xe0:  // pitch bend
        data();
        data();
        break;
      case 0xc0:  // program change
      case 0xd0:  // channel pressure
        data();
        break;
      default:
        raise(ErrorCode::TruncatedChunk, "unknown status byte");
    }
  }

  for (const auto& [key, count] : open) {
    for (int i = 0; i < count; ++i) {
      MidiEvent ev;
      ev.type = MidiEventType::NoteOff;
      ev.tick = tick;
      ev.channel = key.first;
      ev.pitch = key.second;
      track.events.push_back(ev);
    }
    warnings.push_back("track " + std::to_string(trackIndex) + ": note-on ch " +
                       std::to_string(key.first + 1) + " pitch " + std::to_string(key.second) +
                       " never closed; closed at track end");
  }

  // Skip whatever the chunk declared beyond the end-of-track meta.
  if (cur.pos() < end) cur.skip(end - cur.pos());
  return track;
}

}  // namespace

MidiSong parseSmf(const std::vector<uint8_t>& bytes, const std::string& sourcePath) {
  SmfCursor cur(bytes.data(), bytes.size());
  if (cur.remaining() < 4 || cur.tag() != "MThd")
    raise(ErrorCode::MalformedHeader, "missing MThd chunk");
  const uint32_t headerLen = cur.u32be();
  if (headerLen < 6) raise(ErrorCode::MalformedHeader, "MThd length < 6");
  const uint16_t format = cur.u16be();
  const uint16_t ntrks = cur.u16be();
  const uint16_t division = cur.u16be();
  cur.skip(headerLen - 6);

  if (format > 1)
    raise(ErrorCode::UnsupportedFormat, "SMF format " + std::to_string(format) + " unsupported");
  if (division & 0x8000) raise(ErrorCode::UnsupportedFormat, "SMPTE division unsupported");
  if (division == 0) raise(ErrorCode::MalformedHeader, "zero ticks per quarter");

  MidiSong song;
  song.format = format;
  song.ticksPerQuarter = division;
  song.sourcePath = sourcePath;

  int parsed = 0;
  while (parsed < ntrks && cur.remaining() > 0) {
    if (cur.remaining() < 8) raise(ErrorCode::TruncatedChunk, "dangling bytes after last chunk");
    const std::string tag = cur.tag();
    const uint32_t length = cur.u32be();
    if (length > cur.remaining()) raise(ErrorCode::TruncatedChunk, "chunk length past end of file");
    if (tag != "MTrk") {
      cur.skip(length);  // alien chunk, skipped per the SMF spec
      continue;
    }
    song.tracks.push_back(parseTrack(cur, length, song.warnings, parsed));
    ++parsed;
  }
  if (parsed < ntrks)
    raise(ErrorCode::TruncatedChunk, "header declared " + std::to_string(ntrks) +
                                         " tracks, found " + std::to_string(parsed));
  return song;
}

MidiSong readSmfFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::BadFile, "cannot open: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return parseSmf(bytes, path);
}

}  // namespace pirhdy
