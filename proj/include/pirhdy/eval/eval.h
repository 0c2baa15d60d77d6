#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pirhdy/grid/corpus_io.h"
#include "pirhdy/model/training.h"

namespace pirhdy {

/// One retrieval query: a query phrase, its candidate phrases, and which
/// candidate indices count as relevant (ascending, unique).
struct RankingInstance {
  std::vector<NoteEvent> query;
  std::vector<std::vector<NoteEvent>> candidates;
  std::vector<size_t> relevant;

  friend bool operator==(const RankingInstance&, const RankingInstance&) = default;
};

struct MetricReport {
  double map = 0.0;
  std::map<int, double> hits;  // k -> fraction of instances with a hit in top k
  size_t nInstances = 0;
};

inline constexpr std::array<int, 4> kHitsCutoffs{1, 5, 10, 25};
inline constexpr size_t kCandidatesPerInstance = 50;

const char* globalModeName(GlobalMode mode);

/// sigma(query-vector . candidate-vector) — the same form the pair
/// fine-tuning optimizes. GM encodes both sides as melody phrases; GH
/// encodes the candidate as an accompaniment phrase.
double scorePair(const ContextModel& model, const std::vector<NoteEvent>& query,
                 const std::vector<NoteEvent>& candidate, GlobalMode mode);

/// Scores candidate `index` of an instance; lets tests and brute-force
/// oracles drive the ranking machinery without a model.
using CandidateScorer = std::function<double(const RankingInstance&, size_t index)>;

/// Ranks every instance by descending score (ties keep candidate-index
/// order) and aggregates MAP and hits@k over {1, 5, 10, 25}.
MetricReport rankAndScore(const std::vector<RankingInstance>& instances,
                          const CandidateScorer& scorer);
MetricReport rankAndScore(const std::vector<RankingInstance>& instances,
                          const ContextModel& model, GlobalMode mode);

/// Melody completion: every pair's first phrase queries for its true
/// successor among 49 distinct phrases drawn uniformly from other songs'
/// successor phrases. A non-empty `querySongs` keeps only queries from the
/// listed songs (the negative pool still spans the whole corpus).
std::vector<RankingInstance> buildMelodyCompletionSet(
    const PairCorpus& pairs, uint64_t seed, const std::vector<uint32_t>& querySongs = {});

/// Accompaniment assignment: every melody phrase queries for all N of its
/// aligned accompaniment phrases among 50-N drawn from other songs.
std::vector<RankingInstance> buildAccompanimentSet(
    const PairCorpus& pairs, uint64_t seed, const std::vector<uint32_t>& querySongs = {});

/// Mean phrase embedding over a song's surviving melody phrases.
Vec songEmbedding(const ContextModel& model,
                  const std::vector<std::vector<NoteEvent>>& melodyPhrases);

/// Frozen instance set (.rnk) for reproducible reruns.
struct RankingSet {
  uint32_t vocabHash = 0;
  std::vector<RankingInstance> instances;
};

void writeRankingSet(const std::string& path, uint32_t vocabHash,
                     const std::vector<RankingInstance>& instances);
RankingSet readRankingSet(const std::string& path);

/// Labeled-vector text file: header "PIRHDY d=<d> mode=<GM|GH>", then one
/// "<label> v1 .. vd" line per row, floats printed round-trip exact.
void writeVecFile(const std::string& path, int d, GlobalMode mode,
                  const std::vector<std::pair<std::string, Vec>>& rows);

/// Token-embedding rows for every vocabulary symbol: the chroma block,
/// then velocity, then state.
std::vector<std::pair<std::string, Vec>> vocabularyRows(const ParamStore& store,
                                                        const Vocabulary& vocab);

}  // namespace pirhdy
