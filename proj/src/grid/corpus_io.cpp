#include "pirhdy/grid/corpus_io.h"

#include <limits>

#include "pirhdy/util/binio.h"
#include "pirhdy/util/errors.h"

namespace pirhdy {
namespace {

void writeEvent(ByteWriter& out, const NoteEvent& ev) {
  if (ev.ioi < std::numeric_limits<int16_t>::min() || ev.ioi > std::numeric_limits<int16_t>::max())
    raise(ErrorCode::IndexOutOfRange, "ioi out of i16 range");
  out.i16(static_cast<int16_t>(ev.ioi));
  out.u16(static_cast<uint16_t>(ev.chroma));
  out.u8(static_cast<uint8_t>(ev.octave));
  out.u8(static_cast<uint8_t>(ev.velocity));
  out.u8(static_cast<uint8_t>(ev.state));
}

NoteEvent readEvent(ByteReader& in) {
  NoteEvent ev;
  ev.ioi = in.i16();
  ev.chroma = in.u16();
  ev.octave = in.u8();
  ev.velocity = in.u8();
  ev.state = in.u8();
  return ev;
}

}  // namespace

void writeEventList(ByteWriter& out, const std::vector<NoteEvent>& events) {
  if (events.size() > std::numeric_limits<uint16_t>::max())
    raise(ErrorCode::IndexOutOfRange, "event list too long");
  out.u16(static_cast<uint16_t>(events.size()));
  for (const auto& ev : events) writeEvent(out, ev);
}

std::vector<NoteEvent> readEventList(ByteReader& in) {
  const uint16_t n = in.u16();
  std::vector<NoteEvent> events;
  events.reserve(n);
  for (uint16_t i = 0; i < n; ++i) events.push_back(readEvent(in));
  return events;
}

void writeLocalCorpus(const std::string& path, uint32_t vocabHash,
                      const std::vector<LocalSample>& records) {
  ByteWriter out;
  out.str("PRC1");
  out.u32(vocabHash);
  out.u32(static_cast<uint32_t>(records.size()));
  for (const auto& rec : records) {
    if (rec.melodicCtx.size() > 255 || rec.harmonicCtx.size() > 255)
      raise(ErrorCode::IndexOutOfRange, "context too long for record format");
    out.u8(static_cast<uint8_t>(rec.melodicCtx.size()));
    out.u8(static_cast<uint8_t>(rec.harmonicCtx.size()));
    for (const auto& ev : rec.melodicCtx) writeEvent(out, ev);
    for (const auto& ev : rec.harmonicCtx) writeEvent(out, ev);
    writeEvent(out, rec.candidate);
    uint8_t mask = 0;
    for (int j = 0; j < 4; ++j)
      if (rec.labels[j]) mask |= static_cast<uint8_t>(1u << j);
    out.u8(mask);
  }
  out.writeFile(path);
}

LocalCorpus readLocalCorpus(const std::string& path) {
  ByteReader in = ByteReader::fromFile(path);
  if (in.str(4) != "PRC1") raise(ErrorCode::BadFile, "not a local corpus file: " + path);
  LocalCorpus corpus;
  corpus.vocabHash = in.u32();
  const uint32_t count = in.u32();
  corpus.records.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    LocalSample rec;
    const uint8_t nMelodic = in.u8();
    const uint8_t nHarmonic = in.u8();
    for (int j = 0; j < nMelodic; ++j) rec.melodicCtx.push_back(readEvent(in));
    for (int j = 0; j < nHarmonic; ++j) rec.harmonicCtx.push_back(readEvent(in));
    rec.candidate = readEvent(in);
    const uint8_t mask = in.u8();
    for (int j = 0; j < 4; ++j) rec.labels[j] = (mask >> j) & 1;
    corpus.records.push_back(std::move(rec));
  }
  if (!in.atEnd()) raise(ErrorCode::BadFile, "trailing bytes in " + path);
  return corpus;
}

void writePairCorpus(const std::string& path, uint32_t vocabHash,
                     const std::vector<PairRecord>& records) {
  ByteWriter out;
  out.str("GPC1");
  out.u32(vocabHash);
  out.u32(static_cast<uint32_t>(records.size()));
  for (const auto& rec : records) {
    out.u32(rec.songIndex);
    writeEventList(out, rec.a);
    writeEventList(out, rec.b);
  }
  out.writeFile(path);
}

PairCorpus readPairCorpus(const std::string& path) {
  ByteReader in = ByteReader::fromFile(path);
  if (in.str(4) != "GPC1") raise(ErrorCode::BadFile, "not a pair corpus file: " + path);
  PairCorpus corpus;
  corpus.vocabHash = in.u32();
  const uint32_t count = in.u32();
  corpus.records.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    PairRecord rec;
    rec.songIndex = in.u32();
    rec.a = readEventList(in);
    rec.b = readEventList(in);
    corpus.records.push_back(std::move(rec));
  }
  if (!in.atEnd()) raise(ErrorCode::BadFile, "trailing bytes in " + path);
  return corpus;
}

void writeGridSong(const std::string& path, const GridSong& song) {
  ByteWriter out;
  out.str("GRD1");
  if (song.id.size() > std::numeric_limits<uint16_t>::max())
    raise(ErrorCode::IndexOutOfRange, "song id too long");
  out.u16(static_cast<uint16_t>(song.id.size()));
  out.str(song.id);
  out.u32(static_cast<uint32_t>(song.stepsPerBar));
  out.u32(static_cast<uint32_t>(song.melody.size()));
  for (const auto& cell : song.melody) {
    out.i16(static_cast<int16_t>(cell.pitch));
    out.u8(static_cast<uint8_t>(cell.velocity));
    out.u8(static_cast<uint8_t>(cell.state));
  }
  out.u16(static_cast<uint16_t>(song.accompaniment.size()));
  for (const auto& track : song.accompaniment) {
    if (track.cells.size() != song.melody.size())
      raise(ErrorCode::ShapeMismatch, "accompaniment grid length differs from melody");
    out.i16(static_cast<int16_t>(track.octave));
    for (const auto& cell : track.cells) {
      out.u16(cell.pcMask);
      out.u8(static_cast<uint8_t>(cell.velocity));
      out.u8(static_cast<uint8_t>(cell.state));
    }
  }
  out.writeFile(path);
}

GridSong readGridSong(const std::string& path) {
  ByteReader in = ByteReader::fromFile(path);
  if (in.str(4) != "GRD1") raise(ErrorCode::BadFile, "not a grid dump: " + path);
  GridSong song;
  song.id = in.str(in.u16());
  song.stepsPerBar = static_cast<int>(in.u32());
  const uint32_t nSteps = in.u32();
  song.melody.reserve(nSteps);
  for (uint32_t s = 0; s < nSteps; ++s) {
    MelodyCell cell;
    cell.pitch = in.i16();
    cell.velocity = in.u8();
    cell.state = static_cast<StepState>(in.u8());
    song.melody.push_back(cell);
  }
  const uint16_t nTracks = in.u16();
  song.accompaniment.reserve(nTracks);
  for (uint16_t t = 0; t < nTracks; ++t) {
    AccompTrack track;
    track.octave = in.i16();
    track.cells.reserve(nSteps);
    for (uint32_t s = 0; s < nSteps; ++s) {
      AccompCell cell;
      cell.pcMask = in.u16();
      cell.velocity = in.u8();
      cell.state = static_cast<StepState>(in.u8());
      track.cells.push_back(cell);
    }
    song.accompaniment.push_back(std::move(track));
  }
  if (!in.atEnd()) raise(ErrorCode::BadFile, "trailing bytes in " + path);
  return song;
}

}  // namespace pirhdy
