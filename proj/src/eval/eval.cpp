#include "pirhdy/eval/eval.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "pirhdy/nn/ops.h"
#include "pirhdy/util/binio.h"
#include "pirhdy/util/errors.h"

namespace pirhdy {
namespace {

using EventPhrase = std::vector<NoteEvent>;

double scoreAgainst(const ContextModel& model, const Vec& queryVec,
                    const EventPhrase& candidate, GlobalMode mode) {
  Vec c;
  if (mode == GlobalMode::GM) {
    MelodicCtxCache cache;
    c = model.encodePhrase(candidate, cache);
  } else {
    HarmonicCtxCache cache;
    c = model.encodeAccompPhrase(candidate, cache);
  }
  double dot = 0.0;
  for (size_t i = 0; i < queryVec.size(); ++i) dot += queryVec[i] * c[i];
  return sigmoid(dot);
}

/// Indices of records usable as negatives for a query from `songIndex`.
std::vector<size_t> negativePool(const PairCorpus& pairs, uint32_t songIndex) {
  std::vector<size_t> pool;
  for (size_t i = 0; i < pairs.records.size(); ++i)
    if (pairs.records[i].songIndex != songIndex) pool.push_back(i);
  return pool;
}

/// Uniform draw without replacement of `want` partner phrases from other
/// songs, all pairwise distinct and distinct from every excluded phrase.
std::vector<EventPhrase> drawNegatives(const PairCorpus& pairs, uint32_t songIndex,
                                       const std::set<EventPhrase>& exclude, size_t want,
                                       RngStream& rng) {
  std::vector<size_t> pool = negativePool(pairs, songIndex);
  shuffleVec(pool, rng);
  std::vector<EventPhrase> out;
  out.reserve(want);
  std::set<EventPhrase> seen = exclude;
  for (size_t idx : pool) {
    if (out.size() == want) break;
    const EventPhrase& cand = pairs.records[idx].b;
    if (!seen.insert(cand).second) continue;
    out.push_back(cand);
  }
  if (out.size() < want)
    raise(ErrorCode::InsufficientPhrases,
          "negative pool exhausted: wanted " + std::to_string(want) + ", found " +
              std::to_string(out.size()));
  return out;
}

/// Shuffles positives and negatives into one candidate list so relevance
/// never correlates with position, recording where the positives land.
RankingInstance assembleInstance(EventPhrase query, std::vector<EventPhrase> positives,
                                 std::vector<EventPhrase> negatives, RngStream& rng) {
  RankingInstance inst;
  inst.query = std::move(query);
  const size_t n = positives.size() + negatives.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  shuffleVec(order, rng);
  inst.candidates.resize(n);
  for (size_t slot = 0; slot < n; ++slot) {
    const size_t src = order[slot];
    if (src < positives.size()) {
      inst.candidates[slot] = std::move(positives[src]);
      inst.relevant.push_back(slot);
    } else {
      inst.candidates[slot] = std::move(negatives[src - positives.size()]);
    }
  }
  std::sort(inst.relevant.begin(), inst.relevant.end());
  return inst;
}

bool keepSong(const std::vector<uint32_t>& querySongs, uint32_t songIndex) {
  return querySongs.empty() ||
         std::find(querySongs.begin(), querySongs.end(), songIndex) != querySongs.end();
}

}  // namespace

const char* globalModeName(GlobalMode mode) {
  return mode == GlobalMode::GM ? "GM" : "GH";
}

double scorePair(const ContextModel& model, const std::vector<NoteEvent>& query,
                 const std::vector<NoteEvent>& candidate, GlobalMode mode) {
  MelodicCtxCache cache;
  return scoreAgainst(model, model.encodePhrase(query, cache), candidate, mode);
}

MetricReport rankAndScore(const std::vector<RankingInstance>& instances,
                          const CandidateScorer& scorer) {
  if (instances.empty()) raise(ErrorCode::EmptyInstances, "no instances to rank");
  MetricReport report;
  report.nInstances = instances.size();
  for (int k : kHitsCutoffs) report.hits[k] = 0.0;
  for (const auto& inst : instances) {
    const size_t n = inst.candidates.size();
    if (inst.relevant.empty())
      raise(ErrorCode::BadConfig, "instance has no relevant candidates");
    std::vector<char> isRelevant(n, 0);
    for (size_t r : inst.relevant) {
      if (r >= n) raise(ErrorCode::IndexOutOfRange, "relevant index beyond candidate list");
      if (isRelevant[r]) raise(ErrorCode::BadConfig, "duplicate relevant index");
      isRelevant[r] = 1;
    }
    std::vector<double> scores(n);
    for (size_t i = 0; i < n; ++i) scores[i] = scorer(inst, i);
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    double ap = 0.0;
    size_t found = 0;
    size_t firstRank = 0;
    for (size_t pos = 0; pos < n; ++pos) {
      if (!isRelevant[order[pos]]) continue;
      ++found;
      if (found == 1) firstRank = pos + 1;
      ap += static_cast<double>(found) / static_cast<double>(pos + 1);
    }
    report.map += ap / static_cast<double>(inst.relevant.size());
    for (int k : kHitsCutoffs)
      if (firstRank <= static_cast<size_t>(k)) report.hits[k] += 1.0;
  }
  const double count = static_cast<double>(instances.size());
  report.map /= count;
  for (auto& [k, v] : report.hits) v /= count;
  return report;
}

MetricReport rankAndScore(const std::vector<RankingInstance>& instances,
                          const ContextModel& model, GlobalMode mode) {
  // Each query is encoded once and scored against all of its candidates.
  const RankingInstance* current = nullptr;
  Vec queryVec;
  return rankAndScore(instances, [&](const RankingInstance& inst, size_t index) {
    if (&inst != current) {
      MelodicCtxCache cache;
      queryVec = model.encodePhrase(inst.query, cache);
      current = &inst;
    }
    return scoreAgainst(model, queryVec, inst.candidates[index], mode);
  });
}

std::vector<RankingInstance> buildMelodyCompletionSet(
    const PairCorpus& pairs, uint64_t seed, const std::vector<uint32_t>& querySongs) {
  RngStream rng(seed);
  std::vector<RankingInstance> out;
  for (const auto& rec : pairs.records) {
    if (!keepSong(querySongs, rec.songIndex)) continue;
    auto negatives =
        drawNegatives(pairs, rec.songIndex, {rec.b}, kCandidatesPerInstance - 1, rng);
    out.push_back(assembleInstance(rec.a, {rec.b}, std::move(negatives), rng));
  }
  if (out.empty()) raise(ErrorCode::EmptyInstances, "no melody-completion queries");
  return out;
}

std::vector<RankingInstance> buildAccompanimentSet(
    const PairCorpus& pairs, uint64_t seed, const std::vector<uint32_t>& querySongs) {
  // All accompaniments aligned to one melody phrase form one query; the
  // sorted map keys make the instance order deterministic.
  std::map<std::pair<uint32_t, EventPhrase>, std::vector<EventPhrase>> groups;
  for (const auto& rec : pairs.records) {
    auto& positives = groups[{rec.songIndex, rec.a}];
    if (std::find(positives.begin(), positives.end(), rec.b) == positives.end())
      positives.push_back(rec.b);
  }
  RngStream rng(seed);
  std::vector<RankingInstance> out;
  for (auto& [key, positives] : groups) {
    if (!keepSong(querySongs, key.first)) continue;
    if (positives.size() >= kCandidatesPerInstance)
      raise(ErrorCode::InsufficientPhrases, "more true accompaniments than candidate slots");
    const std::set<EventPhrase> exclude(positives.begin(), positives.end());
    auto negatives = drawNegatives(pairs, key.first, exclude,
                                   kCandidatesPerInstance - positives.size(), rng);
    out.push_back(assembleInstance(key.second, std::move(positives), std::move(negatives), rng));
  }
  if (out.empty()) raise(ErrorCode::EmptyInstances, "no accompaniment queries");
  return out;
}

Vec songEmbedding(const ContextModel& model,
                  const std::vector<std::vector<NoteEvent>>& melodyPhrases) {
  if (melodyPhrases.empty()) raise(ErrorCode::EmptyInput, "song has no surviving melody phrases");
  Vec mean(static_cast<size_t>(model.config().d), 0.0);
  for (const auto& phrase : melodyPhrases) {
    MelodicCtxCache cache;
    const Vec v = model.encodePhrase(phrase, cache);
    for (size_t i = 0; i < mean.size(); ++i) mean[i] += v[i];
  }
  for (double& x : mean) x /= static_cast<double>(melodyPhrases.size());
  return mean;
}

void writeRankingSet(const std::string& path, uint32_t vocabHash,
                     const std::vector<RankingInstance>& instances) {
  ByteWriter out;
  out.str("RNK1");
  out.u32(vocabHash);
  out.u32(static_cast<uint32_t>(instances.size()));
  for (const auto& inst : instances) {
    if (inst.candidates.size() > 64)
      raise(ErrorCode::IndexOutOfRange, "relevance mask holds at most 64 candidates");
    writeEventList(out, inst.query);
    out.u16(static_cast<uint16_t>(inst.candidates.size()));
    for (const auto& cand : inst.candidates) writeEventList(out, cand);
    uint64_t mask = 0;
    for (size_t r : inst.relevant) {
      if (r >= inst.candidates.size())
        raise(ErrorCode::IndexOutOfRange, "relevant index beyond candidate list");
      mask |= uint64_t{1} << r;
    }
    out.u64(mask);
  }
  out.writeFile(path);
}

RankingSet readRankingSet(const std::string& path) {
  ByteReader in = ByteReader::fromFile(path);
  if (in.str(4) != "RNK1") raise(ErrorCode::BadFile, "not a ranking set file: " + path);
  RankingSet set;
  set.vocabHash = in.u32();
  const uint32_t count = in.u32();
  set.instances.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    RankingInstance inst;
    inst.query = readEventList(in);
    const uint16_t nCand = in.u16();
    inst.candidates.reserve(nCand);
    for (uint16_t c = 0; c < nCand; ++c) inst.candidates.push_back(readEventList(in));
    const uint64_t mask = in.u64();
    for (size_t r = 0; r < nCand; ++r)
      if ((mask >> r) & 1) inst.relevant.push_back(r);
    set.instances.push_back(std::move(inst));
  }
  if (!in.atEnd()) raise(ErrorCode::BadFile, "trailing bytes in " + path);
  return set;
}

void writeVecFile(const std::string& path, int d, GlobalMode mode,
                  const std::vector<std::pair<std::string, Vec>>& rows) {
  std::string text = "PIRHDY d=" + std::to_string(d) + " mode=" + globalModeName(mode) + "\n";
  char buf[40];
  for (const auto& [label, v] : rows) {
    if (v.size() != static_cast<size_t>(d))
      raise(ErrorCode::ShapeMismatch, "vector for '" + label + "' is not length d");
    text += label;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      text += buf;
    }
    text += '\n';
  }
  ByteWriter out;
  out.str(text);
  out.writeFile(path);
}

std::vector<std::pair<std::string, Vec>> vocabularyRows(const ParamStore& store,
                                                        const Vocabulary& vocab) {
  std::vector<std::pair<std::string, Vec>> rows;
  const auto addBlock = [&](const std::string& table, const std::vector<std::string>& symbols) {
    const Tensor& t = store.value(table);
    if (t.rows() != static_cast<int>(symbols.size()))
      raise(ErrorCode::ShapeMismatch, table + " does not cover the vocabulary");
    for (size_t i = 0; i < symbols.size(); ++i) {
      const double* r = t.row(static_cast<int>(i));
      rows.emplace_back(symbols[i], Vec(r, r + t.cols()));
    }
  };
  addBlock("chroma_table", vocab.chroma);
  addBlock("velocity_table", vocab.velocity);
  addBlock("state_table", vocab.state);
  return rows;
}

}  // namespace pirhdy
