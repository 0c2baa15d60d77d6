#include "pirhdy/grid/vocabulary.h"

#include <bit>
#include <fstream>

#include "json.hpp"
#include "pirhdy/util/binio.h"
#include "pirhdy/util/errors.h"

namespace pirhdy {

Vocabulary::Vocabulary() {
  for (int pc = 0; pc < 12; ++pc) chroma.push_back(pitchClassName(pc));
  chroma.push_back("R");
  velocity = {"pppp", "ppp", "pp", "p", "mp", "mf", "f", "ff", "fff", "ffff", "R"};
  state = {"on", "hold", "off", "r"};
  for (size_t i = 0; i < chroma.size(); ++i) chromaIndex[chroma[i]] = static_cast<int>(i);
}

int Vocabulary::chromaOf(const std::string& symbol) const {
  auto it = chromaIndex.find(symbol);
  if (it == chromaIndex.end())
    raise(ErrorCode::IndexOutOfRange, "unknown chroma symbol: " + symbol);
  return it->second;
}

bool Vocabulary::hasChroma(const std::string& symbol) const {
  return chromaIndex.count(symbol) > 0;
}

int Vocabulary::internChroma(const std::string& symbol) {
  auto it = chromaIndex.find(symbol);
  if (it != chromaIndex.end()) return it->second;
  const int index = static_cast<int>(chroma.size());
  chroma.push_back(symbol);
  chromaIndex[symbol] = index;
  return index;
}

uint32_t Vocabulary::fingerprint() const {
  uint32_t h = 2166136261u;
  for (const auto* list : {&chroma, &velocity, &state}) {
    for (const auto& symbol : *list) {
      h = fnv1a(symbol.data(), symbol.size(), h);
      const uint8_t sep = 0;
      h = fnv1a(&sep, 1, h);
    }
    const uint8_t groupSep = 0x1e;
    h = fnv1a(&groupSep, 1, h);
  }
  return h;
}

void Vocabulary::save(const std::string& path) const {
  nlohmann::json j;
  j["chroma"] = chroma;
  j["velocity"] = velocity;
  j["state"] = state;
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::BadFile, "cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::BadFile, "cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::BadFile, std::string("bad vocabulary JSON: ") + e.what());
  }

  Vocabulary vocab;
  const auto chroma = j.at("chroma").get<std::vector<std::string>>();
  const auto velocity = j.at("velocity").get<std::vector<std::string>>();
  const auto state = j.at("state").get<std::vector<std::string>>();
  if (chroma.size() < 13 || velocity.size() != 11 || state.size() != 4)
    raise(ErrorCode::BadFile, "vocabulary sizes out of contract in " + path);
  for (size_t i = 0; i < 13; ++i)
    if (chroma[i] != vocab.chroma[i])
      raise(ErrorCode::BadFile, "fixed chroma prefix mismatch in " + path);
  if (velocity != vocab.velocity || state != vocab.state)
    raise(ErrorCode::BadFile, "fixed symbol lists mismatch in " + path);
  for (size_t i = 13; i < chroma.size(); ++i) vocab.internChroma(chroma[i]);
  return vocab;
}

Vocabulary buildVocabulary(const std::vector<GridSong>& corpus) {
  if (corpus.empty()) raise(ErrorCode::EmptyCorpus, "no songs to build a vocabulary from");
  Vocabulary vocab;
  for (const auto& song : corpus) {
    for (const auto& track : song.accompaniment) {
      for (const auto& cell : track.cells) {
        if (std::popcount(cell.pcMask) < 2) continue;  // rest or single pc
        vocab.internChroma(chordSymbol(cell.pcMask));
      }
    }
  }
  return vocab;
}

}  // namespace pirhdy
