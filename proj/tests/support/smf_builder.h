#pragma once

// Builders for crafting Standard MIDI File byte vectors in tests.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace pirhdy::testsupport {

struct TrackBuilder {
  std::vector<uint8_t> data;

  TrackBuilder& vlq(uint32_t v) {
    uint8_t tmp[4];
    int n = 0;
    do {
      tmp[n++] = static_cast<uint8_t>(v & 0x7f);
      v >>= 7;
    } while (v > 0);
    for (int i = n - 1; i >= 0; --i)
      data.push_back(i == 0 ? tmp[i] : static_cast<uint8_t>(tmp[i] | 0x80));
    return *this;
  }
  TrackBuilder& raw(std::initializer_list<uint8_t> bytes) {
    data.insert(data.end(), bytes);
    return *this;
  }
  TrackBuilder& noteOn(uint32_t delta, int ch, int pitch, int vel) {
    vlq(delta);
    return raw({static_cast<uint8_t>(0x90 | ch), static_cast<uint8_t>(pitch),
                static_cast<uint8_t>(vel)});
  }
  TrackBuilder& noteOff(uint32_t delta, int ch, int pitch) {
    vlq(delta);
    return raw({static_cast<uint8_t>(0x80 | ch), static_cast<uint8_t>(pitch), 0x40});
  }
  TrackBuilder& meta(uint32_t delta, uint8_t type, std::initializer_list<uint8_t> payload) {
    vlq(delta);
    data.push_back(0xff);
    data.push_back(type);
    vlq(static_cast<uint32_t>(payload.size()));
    data.insert(data.end(), payload);
    return *this;
  }
  TrackBuilder& tempo(uint32_t delta, uint32_t usPerQuarter) {
    return meta(delta, 0x51,
                {static_cast<uint8_t>(usPerQuarter >> 16), static_cast<uint8_t>(usPerQuarter >> 8),
                 static_cast<uint8_t>(usPerQuarter)});
  }
  TrackBuilder& timeSignature(uint32_t delta, uint8_t numerator, uint8_t denomPow2) {
    return meta(delta, 0x58, {numerator, denomPow2, 24, 8});
  }
  TrackBuilder& keySignature(uint32_t delta, int8_t sharps, bool minor) {
    return meta(delta, 0x59, {static_cast<uint8_t>(sharps), static_cast<uint8_t>(minor ? 1 : 0)});
  }
  TrackBuilder& endOfTrack(uint32_t delta = 0) { return meta(delta, 0x2f, {}); }
};

inline std::vector<uint8_t> buildSmf(int format, int tpq,
                                     const std::vector<TrackBuilder>& tracks) {
  std::vector<uint8_t> out;
  auto u16 = [&](uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xff));
  };
  auto u32 = [&](uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  };
  out.insert(out.end(), {'M', 'T', 'h', 'd'});
  u32(6);
  u16(static_cast<uint16_t>(format));
  u16(static_cast<uint16_t>(tracks.size()));
  u16(static_cast<uint16_t>(tpq));
  for (const auto& track : tracks) {
    out.insert(out.end(), {'M', 'T', 'r', 'k'});
    u32(static_cast<uint32_t>(track.data.size()));
    out.insert(out.end(), track.data.begin(), track.data.end());
  }
  return out;
}

}  // namespace pirhdy::testsupport
