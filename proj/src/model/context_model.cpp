#include "pirhdy/model/context_model.h"

namespace pirhdy {

namespace {

struct ParamSpec {
  std::string name;
  std::vector<int> shape;
  ParamInit init;
};

std::vector<ParamSpec> contextParamSpecs(const TrainConfig& cfg) {
  const int d = cfg.d;
  std::vector<ParamSpec> specs;
  auto gruStack = [&](const std::string& prefix) {
    for (int l = 0; l < cfg.rnnLayers; ++l) {
      const std::string base = prefix + std::to_string(l);
      specs.push_back({base + "_wx", {3 * d, d}, ParamInit::FanIn});
      specs.push_back({base + "_uh", {3 * d, d}, ParamInit::FanIn});
      specs.push_back({base + "_b", {3 * d}, ParamInit::Zeros});
    }
  };
  auto attention = [&](const std::string& prefix) {
    specs.push_back({prefix + "_w", {d, d}, ParamInit::FanIn});
    specs.push_back({prefix + "_b", {d}, ParamInit::Zeros});
    specs.push_back({prefix + "_u", {d}, ParamInit::FanIn});
  };
  gruStack("ctx_melodic_gru");
  attention("ctx_melodic_attn");
  attention("ctx_harmonic_attn");
  specs.push_back({"head_w1", {d, 2 * d}, ParamInit::FanIn});
  specs.push_back({"head_b1", {d}, ParamInit::Zeros});
  specs.push_back({"head_w2", {4, d}, ParamInit::FanIn});
  specs.push_back({"head_b2", {4}, ParamInit::Zeros});
  specs.push_back({"fusion_gate", {1}, ParamInit::Zeros});
  gruStack("period_gru");
  attention("period_attn");
  attention("track_attn");
  return specs;
}

std::vector<std::string> tokenParamNames() {
  return {"chroma_table",    "velocity_table",   "state_table",     "fusion_melodic_w",
          "fusion_melodic_b", "fusion_harmonic_w", "fusion_harmonic_b"};
}

TokenConfig tokenConfigOf(const TrainConfig& cfg, int chromaCount) {
  TokenConfig tc;
  tc.d = cfg.d;
  tc.chromaCount = chromaCount;
  tc.features = cfg.features;
  return tc;
}

}  // namespace

ContextModel::ContextModel(ParamStore& store, const TrainConfig& cfg, int chromaCount,
                           RngStream* rng)
    : store_(&store), cfg_(cfg), tokens_(store, tokenConfigOf(cfg, chromaCount), rng) {
  if (cfg_.rnnLayers <= 0) raise(ErrorCode::BadConfig, "need at least one recurrent layer");
  for (const auto& spec : contextParamSpecs(cfg_)) {
    if (store.has(spec.name)) {
      if (store.value(spec.name).shape != spec.shape)
        raise(ErrorCode::BadConfig, "parameter " + spec.name + " has an unexpected shape");
      continue;
    }
    if (rng == nullptr)
      raise(ErrorCode::BadConfig, "fresh context model needs a random stream");
    store.add(spec.name, spec.shape, spec.init, *rng);
  }
}

bool ContextModel::hasParams(const ParamStore& store, const TrainConfig& cfg,
                             int chromaCount) {
  (void)chromaCount;
  for (const auto& name : tokenParamNames())
    if (!store.has(name)) return false;
  for (const auto& spec : contextParamSpecs(cfg))
    if (!store.has(spec.name)) return false;
  return true;
}

GruRefs ContextModel::melodicGruRefs(int layer) const {
  const std::string base = "ctx_melodic_gru" + std::to_string(layer);
  return GruRefs{&store_->value(base + "_wx"), &store_->value(base + "_uh"),
                 &store_->value(base + "_b"),  &store_->grad(base + "_wx"),
                 &store_->grad(base + "_uh"),  &store_->grad(base + "_b")};
}

GruRefs ContextModel::periodGruRefs(int layer) const {
  const std::string base = "period_gru" + std::to_string(layer);
  return GruRefs{&store_->value(base + "_wx"), &store_->value(base + "_uh"),
                 &store_->value(base + "_b"),  &store_->grad(base + "_wx"),
                 &store_->grad(base + "_uh"),  &store_->grad(base + "_b")};
}

AttnRefs ContextModel::attnRefs(const std::string& prefix) const {
  return AttnRefs{&store_->value(prefix + "_w"), &store_->value(prefix + "_b"),
                  &store_->value(prefix + "_u"), &store_->grad(prefix + "_w"),
                  &store_->grad(prefix + "_b"),  &store_->grad(prefix + "_u")};
}

DenseRefs ContextModel::headRefs(int layer) const {
  const std::string w = layer == 0 ? "head_w1" : "head_w2";
  const std::string b = layer == 0 ? "head_b1" : "head_b2";
  return DenseRefs{&store_->value(w), &store_->value(b), &store_->grad(w), &store_->grad(b)};
}

Vec ContextModel::encodeMelodicCtx(const std::vector<NoteEvent>& events,
                                   MelodicCtxCache& cache) const {
  if (events.empty()) raise(ErrorCode::EmptyContext, "melodic context has no events");
  cache.tokens.resize(events.size());
  VecSeq x(events.size());
  for (size_t t = 0; t < events.size(); ++t)
    x[t] = tokens_.embed(events[t], true, cache.tokens[t]);
  cache.layers.resize(static_cast<size_t>(cfg_.rnnLayers));
  for (int l = 0; l < cfg_.rnnLayers; ++l)
    x = gruForward(melodicGruRefs(l), x, cache.layers[static_cast<size_t>(l)]);
  return attentionForward(attnRefs("ctx_melodic_attn"), x, cache.attn);
}

void ContextModel::melodicCtxBackward(const Vec& dOut, const MelodicCtxCache& cache) const {
  VecSeq dH(cache.attn.h.size(), Vec(static_cast<size_t>(cfg_.d), 0.0));
  attentionBackward(attnRefs("ctx_melodic_attn"), cache.attn, dOut, dH);
  for (int l = cfg_.rnnLayers - 1; l >= 0; --l)
    dH = gruBackward(melodicGruRefs(l), cache.layers[static_cast<size_t>(l)], dH);
  for (size_t t = 0; t < cache.tokens.size(); ++t)
    tokens_.embedBackward(dH[t], cache.tokens[t]);
}

Vec ContextModel::encodeHarmonicCtx(const std::vector<NoteEvent>& events,
                                    HarmonicCtxCache& cache) const {
  if (events.empty()) raise(ErrorCode::EmptyContext, "harmonic context has no events");
  cache.tokens.resize(events.size());
  VecSeq x(events.size());
  for (size_t t = 0; t < events.size(); ++t)
    x[t] = tokens_.embed(events[t], false, cache.tokens[t]);
  return attentionForward(attnRefs("ctx_harmonic_attn"), x, cache.attn);
}

void ContextModel::harmonicCtxBackward(const Vec& dOut, const HarmonicCtxCache& cache) const {
  VecSeq dH(cache.attn.h.size(), Vec(static_cast<size_t>(cfg_.d), 0.0));
  attentionBackward(attnRefs("ctx_harmonic_attn"), cache.attn, dOut, dH);
  for (size_t t = 0; t < cache.tokens.size(); ++t)
    tokens_.embedBackward(dH[t], cache.tokens[t]);
}

Vec ContextModel::predictLabels(const Vec& h, const NoteEvent& candidate, bool melodic,
                                HeadCache& cache) const {
  NoteEvent cand = candidate;
  if (melodic) cand.ioi = 0;  // the center is scored against itself
  const Vec e = tokens_.embed(cand, melodic, cache.candidate);
  Vec concat;
  concat.reserve(h.size() + e.size());
  concat.insert(concat.end(), h.begin(), h.end());
  concat.insert(concat.end(), e.begin(), e.end());
  const Vec hidden = denseForward(headRefs(0), concat, true, cache.hidden);
  return denseForward(headRefs(1), hidden, false, cache.out);
}

Vec ContextModel::predictLabelsBackward(const Vec& dLogits, const HeadCache& cache) const {
  const Vec dHidden = denseBackward(headRefs(1), cache.out, dLogits, false);
  const Vec dConcat = denseBackward(headRefs(0), cache.hidden, dHidden, true);
  const size_t d = static_cast<size_t>(cfg_.d);
  const Vec dCand(dConcat.begin() + d, dConcat.end());
  tokens_.embedBackward(dCand, cache.candidate);
  return Vec(dConcat.begin(), dConcat.begin() + d);
}

double ContextModel::alpha() const {
  if (cfg_.fusion != FusionMode::WT) return 0.5;
  return sigmoid(store_->value("fusion_gate")(0));
}

BranchLoss ContextModel::localLoss(const std::vector<LocalSample>& records,
                                   const std::vector<size_t>& groupIndices,
                                   bool withGrad) const {
  if (groupIndices.empty()) raise(ErrorCode::EmptyBatch, "no sample groups in batch");
  const bool useMel = cfg_.fusion != FusionMode::HarmonyOnly;
  const bool useHar = cfg_.fusion != FusionMode::MelodyOnly;
  const double al = alpha();
  double wMel = 0.0, wHar = 0.0;
  switch (cfg_.fusion) {
    case FusionMode::WT: wMel = al; wHar = 1.0 - al; break;
    case FusionMode::AVG: wMel = 0.5; wHar = 0.5; break;
    case FusionMode::MelodyOnly: wMel = 1.0; break;
    case FusionMode::HarmonyOnly: wHar = 1.0; break;
  }

  const size_t groupSize = 1 + static_cast<size_t>(cfg_.negativesPerPositive);
  const double total = static_cast<double>(groupSize * groupIndices.size());
  const size_t d = static_cast<size_t>(cfg_.d);
  double sumMel = 0.0, sumHar = 0.0;

  for (const size_t g : groupIndices) {
    const size_t base = g * groupSize;
    if (base + groupSize > records.size())
      raise(ErrorCode::IndexOutOfRange, "sample group index past the corpus");
    const LocalSample& positive = records[base];

    auto runBranch = [&](bool melodic, double weight, double& sum) {
      MelodicCtxCache mc;
      HarmonicCtxCache hc;
      const Vec h = melodic ? encodeMelodicCtx(positive.melodicCtx, mc)
                            : encodeHarmonicCtx(positive.harmonicCtx, hc);
      Vec dh(d, 0.0);
      for (size_t i = 0; i < groupSize; ++i) {
        const LocalSample& s = records[base + i];
        HeadCache head;
        const Vec logits = predictLabels(h, s.candidate, melodic, head);
        std::vector<uint8_t> labels(s.labels.begin(), s.labels.end());
        Vec dz;
        sum += bceWithLogits(logits, labels, dz);
        if (withGrad && weight > 0.0) {
          for (double& v : dz) v *= weight / total;
          const Vec dhPart = predictLabelsBackward(dz, head);
          for (size_t j = 0; j < d; ++j) dh[j] += dhPart[j];
        }
      }
      if (withGrad && weight > 0.0) {
        if (melodic)
          melodicCtxBackward(dh, mc);
        else
          harmonicCtxBackward(dh, hc);
      }
    };

    if (useMel) runBranch(true, wMel, sumMel);
    if (useHar) runBranch(false, wHar, sumHar);
  }

  BranchLoss loss;
  loss.melodic = useMel ? sumMel / total : 0.0;
  loss.harmonic = useHar ? sumHar / total : 0.0;
  switch (cfg_.fusion) {
    case FusionMode::WT: loss.fused = al * loss.melodic + (1.0 - al) * loss.harmonic; break;
    case FusionMode::AVG: loss.fused = 0.5 * (loss.melodic + loss.harmonic); break;
    case FusionMode::MelodyOnly: loss.fused = loss.melodic; break;
    case FusionMode::HarmonyOnly: loss.fused = loss.harmonic; break;
  }
  if (withGrad && cfg_.fusion == FusionMode::WT)
    store_->grad("fusion_gate")(0) += (loss.melodic - loss.harmonic) * al * (1.0 - al);
  return loss;
}

Vec ContextModel::encodePhrase(const std::vector<NoteEvent>& events,
                               MelodicCtxCache& cache) const {
  if (events.empty()) raise(ErrorCode::EmptyPhrase, "phrase has no events");
  return encodeMelodicCtx(events, cache);
}

Vec ContextModel::encodeAccompPhrase(const std::vector<NoteEvent>& events,
                                     HarmonicCtxCache& cache) const {
  if (events.empty()) raise(ErrorCode::EmptyPhrase, "phrase has no events");
  return encodeHarmonicCtx(events, cache);
}

Vec ContextModel::encodePeriod(const VecSeq& phraseVecs) const {
  if (phraseVecs.empty()) raise(ErrorCode::EmptyInput, "period has no phrase vectors");
  VecSeq x = phraseVecs;
  for (int l = 0; l < cfg_.rnnLayers; ++l) {
    GruCache cache;
    x = gruForward(periodGruRefs(l), x, cache);
  }
  AttnCache attn;
  return attentionForward(attnRefs("period_attn"), x, attn);
}

Vec ContextModel::encodeTrack(const VecSeq& phraseVecs) const {
  if (phraseVecs.empty()) raise(ErrorCode::EmptyInput, "track has no phrase vectors");
  AttnCache attn;
  return attentionForward(attnRefs("track_attn"), phraseVecs, attn);
}

}  // namespace pirhdy
