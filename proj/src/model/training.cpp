#include "pirhdy/model/training.h"

#include <cmath>
#include <limits>

namespace pirhdy {

namespace {

constexpr uint64_t kEvalStreamSalt = 0x9e3779b97f4a7c15ull;

double dot(const Vec& a, const Vec& b) {
  double total = 0.0;
  for (size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total;
}

/// Deterministic split: shuffle group ids under the config seed and hold
/// out the leading tenth.
void splitHoldout(size_t n, uint64_t seed, std::vector<size_t>& train,
                  std::vector<size_t>& holdout) {
  std::vector<size_t> ids(n);
  for (size_t i = 0; i < n; ++i) ids[i] = i;
  RngStream rng(seed);
  shuffleVec(ids, rng);
  const size_t nHold = n / 10;
  holdout.assign(ids.begin(), ids.begin() + static_cast<long>(nHold));
  train.assign(ids.begin() + static_cast<long>(nHold), ids.end());
}

}  // namespace

TrainResult trainLocal(ContextModel& model, const LocalCorpus& corpus,
                       const TrainConfig& cfg) {
  const size_t groupSize = 1 + static_cast<size_t>(cfg.negativesPerPositive);
  if (corpus.records.empty()) raise(ErrorCode::EmptyCorpus, "no local samples to train on");
  if (corpus.records.size() % groupSize != 0)
    raise(ErrorCode::BadFile, "sample records are not in positive+negatives groups");
  const size_t nGroups = corpus.records.size() / groupSize;

  std::vector<size_t> train, holdout;
  splitHoldout(nGroups, cfg.seed, train, holdout);

  auto measure = [&](const std::vector<size_t>& idx) {
    if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
    return model.localLoss(corpus.records, idx, false).fused;
  };

  TrainResult result;
  result.epochs.push_back({0, measure(train), measure(holdout)});

  RngStream order(cfg.seed ^ kEvalStreamSalt);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffleVec(train, order);
    double lossSum = 0.0;
    size_t counted = 0;
    const size_t step = static_cast<size_t>(cfg.batchSize);
    for (size_t start = 0; start < train.size(); start += step) {
      const size_t end = std::min(train.size(), start + step);
      const std::vector<size_t> batch(train.begin() + static_cast<long>(start),
                                      train.begin() + static_cast<long>(end));
      const BranchLoss loss = model.localLoss(corpus.records, batch, true);
      if (!std::isfinite(loss.fused))
        raise(ErrorCode::DivergedLoss, "training loss is no longer finite");
      model.store().adamStep(cfg.lr, cfg.beta1, cfg.beta2);
      lossSum += loss.fused * static_cast<double>(batch.size());
      counted += batch.size();
    }
    result.epochs.push_back(
        {epoch, lossSum / static_cast<double>(counted), measure(holdout)});
  }
  return result;
}

void requirePretrained(const ParamStore& store, const TrainConfig& cfg, int chromaCount) {
  if (!ContextModel::hasParams(store, cfg, chromaCount))
    raise(ErrorCode::NotPretrained, "checkpoint is missing pretrained parameters");
}

TrainResult finetuneGlobal(ContextModel& model, const PairCorpus& pairs, GlobalMode mode,
                           const TrainConfig& cfg) {
  if (pairs.records.empty()) raise(ErrorCode::EmptyPairs, "no phrase pairs to fine-tune on");
  const size_t n = pairs.records.size();

  std::vector<size_t> train, holdout;
  splitHoldout(n, cfg.seed, train, holdout);

  // Negatives come from the partner-side phrase pool.
  using Events = std::vector<NoteEvent>;
  auto sampleNegative = [&](const Events& positive, RngStream& rng) -> const Events& {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto& cand = pairs.records[rng.uniformInt(n)].b;
      if (cand != positive) return cand;
    }
    for (const auto& rec : pairs.records)  // degenerate pool fallback
      if (rec.b != positive) return rec.b;
    raise(ErrorCode::EmptyPairs, "every candidate negative equals the positive phrase");
  };

  // Scores one (query, partner) pair; with grad, backpropagates through
  // both encoders at the given weight.
  auto scorePair = [&](const PairRecord& rec, const std::vector<NoteEvent>& partner,
                       uint8_t label, bool withGrad, double scale) {
    MelodicCtxCache queryCache;
    const Vec q = model.encodePhrase(rec.a, queryCache);

    MelodicCtxCache melodicCache;
    HarmonicCtxCache harmonicCache;
    const Vec p = mode == GlobalMode::GM ? model.encodePhrase(partner, melodicCache)
                                         : model.encodeAccompPhrase(partner, harmonicCache);
    Vec dz;
    const double loss = bceWithLogits({dot(q, p)}, {label}, dz);
    if (withGrad) {
      const double g = dz[0] * scale;
      Vec dq(q.size()), dp(p.size());
      for (size_t i = 0; i < q.size(); ++i) {
        dq[i] = g * p[i];
        dp[i] = g * q[i];
      }
      model.melodicCtxBackward(dq, queryCache);
      if (mode == GlobalMode::GM)
        model.melodicCtxBackward(dp, melodicCache);
      else
        model.harmonicCtxBackward(dp, harmonicCache);
    }
    return loss;
  };

  auto measure = [&](const std::vector<size_t>& idx, uint64_t evalSeed) {
    if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
    RngStream evalRng(evalSeed);
    double sum = 0.0;
    for (const size_t i : idx) {
      const PairRecord& rec = pairs.records[i];
      sum += scorePair(rec, rec.b, 1, false, 0.0);
      sum += scorePair(rec, sampleNegative(rec.b, evalRng), 0, false, 0.0);
    }
    return sum / static_cast<double>(2 * idx.size());
  };

  TrainResult result;
  result.epochs.push_back(
      {0, measure(train, cfg.seed ^ kEvalStreamSalt), measure(holdout, cfg.seed)});

  RngStream rng(cfg.seed + 1);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffleVec(train, rng);
    double lossSum = 0.0;
    size_t counted = 0;
    const size_t step = static_cast<size_t>(cfg.batchSize);
    for (size_t start = 0; start < train.size(); start += step) {
      const size_t end = std::min(train.size(), start + step);
      const double scale = 1.0 / static_cast<double>(2 * (end - start));
      double batchLoss = 0.0;
      for (size_t k = start; k < end; ++k) {
        const PairRecord& rec = pairs.records[train[k]];
        batchLoss += scorePair(rec, rec.b, 1, true, scale);
        batchLoss += scorePair(rec, sampleNegative(rec.b, rng), 0, true, scale);
      }
      batchLoss *= scale;
      if (!std::isfinite(batchLoss))
        raise(ErrorCode::DivergedLoss, "fine-tuning loss is no longer finite");
      model.store().adamStep(cfg.lr, cfg.beta1, cfg.beta2);
      lossSum += batchLoss * static_cast<double>(2 * (end - start));
      counted += 2 * (end - start);
    }
    result.epochs.push_back({epoch, lossSum / static_cast<double>(counted),
                             measure(holdout, cfg.seed)});
  }
  return result;
}

}  // namespace pirhdy
