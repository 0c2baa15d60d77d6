#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pirhdy/grid/grid.h"

namespace pirhdy {

// Fixed symbol indices.
constexpr int kChromaRest = 12;   // "R" in the chroma vocabulary
constexpr int kVelocityRest = 10; // "R" in the velocity vocabulary
constexpr int kStateOn = 0;
constexpr int kStateHold = 1;
constexpr int kStateOff = 2;
constexpr int kStateRest = 3;
constexpr int kNumOctaves = 11;  // floor(127/12) = 10, inclusive

/// Symbol tables for the three categorical features. Chroma grows with the
/// corpus (pitch classes, rest, then chords in order of first appearance);
/// velocity and state are fixed.
struct Vocabulary {
  std::vector<std::string> chroma;
  std::vector<std::string> velocity;
  std::vector<std::string> state;
  std::unordered_map<std::string, int> chromaIndex;

  Vocabulary();

  int chromaOf(const std::string& symbol) const;
  bool hasChroma(const std::string& symbol) const;
  /// Registers a chord symbol if unseen; returns its index.
  int internChroma(const std::string& symbol);

  /// FNV-1a over all three symbol lists; guards corpora against being read
  /// with a different vocabulary.
  uint32_t fingerprint() const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
};

/// Chroma vocabulary from a corpus: 12 pitch classes, R, then every chord
/// in corpus order of first appearance. Throws EmptyCorpus.
Vocabulary buildVocabulary(const std::vector<GridSong>& corpus);

}  // namespace pirhdy
