#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pirhdy/grid/sampling.h"
#include "pirhdy/util/binio.h"

namespace pirhdy {

/// Shared record framing: a u16 count followed by packed 7-byte events.
void writeEventList(ByteWriter& out, const std::vector<NoteEvent>& events);
std::vector<NoteEvent> readEventList(ByteReader& in);

/// Local-context corpus (.prc). Records are laid out in groups of five —
/// the positive followed by its four negatives.
struct LocalCorpus {
  uint32_t vocabHash{0};
  std::vector<LocalSample> records;
};

void writeLocalCorpus(const std::string& path, uint32_t vocabHash,
                      const std::vector<LocalSample>& records);
LocalCorpus readLocalCorpus(const std::string& path);

/// One fine-tuning pair: two phrase event sequences from the same song.
struct PairRecord {
  uint32_t songIndex{0};
  std::vector<NoteEvent> a;
  std::vector<NoteEvent> b;
};

struct PairCorpus {
  uint32_t vocabHash{0};
  std::vector<PairRecord> records;
};

void writePairCorpus(const std::string& path, uint32_t vocabHash,
                     const std::vector<PairRecord>& records);
PairCorpus readPairCorpus(const std::string& path);

/// Preprocessed-song dump (.grd): the full step grid of one song.
void writeGridSong(const std::string& path, const GridSong& song);
GridSong readGridSong(const std::string& path);

}  // namespace pirhdy
