#include "pirhdy/model/token_model.h"

#include "pirhdy/grid/vocabulary.h"

namespace pirhdy {

namespace {

constexpr int kPitchClasses = 12;

void checkShape(const ParamStore& store, const std::string& name,
                const std::vector<int>& want) {
  if (!store.has(name))
    raise(ErrorCode::BadConfig, "parameter store is missing " + name);
  if (store.value(name).shape != want)
    raise(ErrorCode::BadConfig, "parameter " + name + " has an unexpected shape");
}

}  // namespace

TokenModel::TokenModel(ParamStore& store, const TokenConfig& cfg, RngStream* rng)
    : store_(&store), cfg_(cfg) {
  if (cfg_.d <= 0) raise(ErrorCode::BadConfig, "embedding width must be positive");
  if (cfg_.chromaCount < kPitchClasses + 1)
    raise(ErrorCode::BadConfig, "chroma vocabulary is smaller than its fixed prefix");
  if (harmonicInputDim() == 0)
    raise(ErrorCode::BadConfig, "feature selection leaves harmonic tokens empty");

  const std::vector<int> chromaShape{cfg_.chromaCount, cfg_.d};
  const std::vector<int> velocityShape{kVelocityRest + 1, cfg_.d};
  const std::vector<int> stateShape{4, cfg_.d};
  const std::vector<int> melShape{cfg_.d, melodicInputDim()};
  const std::vector<int> harShape{cfg_.d, harmonicInputDim()};
  const std::vector<int> biasShape{cfg_.d};

  if (store.has("chroma_table")) {
    checkShape(store, "chroma_table", chromaShape);
    checkShape(store, "velocity_table", velocityShape);
    checkShape(store, "state_table", stateShape);
    checkShape(store, "fusion_melodic_w", melShape);
    checkShape(store, "fusion_melodic_b", biasShape);
    checkShape(store, "fusion_harmonic_w", harShape);
    checkShape(store, "fusion_harmonic_b", biasShape);
    return;
  }
  if (rng == nullptr)
    raise(ErrorCode::BadConfig, "fresh token model needs a random stream");
  store.add("chroma_table", chromaShape, ParamInit::Embedding, *rng);
  store.add("velocity_table", velocityShape, ParamInit::Embedding, *rng);
  store.add("state_table", stateShape, ParamInit::Embedding, *rng);
  store.add("fusion_melodic_w", melShape, ParamInit::FanIn, *rng);
  store.add("fusion_melodic_b", biasShape, ParamInit::Zeros, *rng);
  store.add("fusion_harmonic_w", harShape, ParamInit::FanIn, *rng);
  store.add("fusion_harmonic_b", biasShape, ParamInit::Zeros, *rng);
}

int TokenModel::melodicInputDim() const {
  const auto& f = cfg_.features;
  const int segments = (f.chroma ? 1 : 0) + (f.ioi ? 1 : 0) +
                       (f.velocity ? 1 : 0) + (f.state ? 1 : 0);
  return segments * cfg_.d;
}

int TokenModel::harmonicInputDim() const {
  const auto& f = cfg_.features;
  const int segments = (f.chroma ? 1 : 0) + (f.velocity ? 1 : 0) + (f.state ? 1 : 0);
  return segments * cfg_.d;
}

Vec TokenModel::octaveBase() const {
  const Tensor& table = store_->value("chroma_table");
  Vec base(static_cast<size_t>(cfg_.d), 0.0);
  for (int pc = 0; pc < kPitchClasses; ++pc) {
    const double* row = table.row(pc);
    for (int j = 0; j < cfg_.d; ++j) base[j] += row[j];
  }
  for (double& v : base) v /= kPitchClasses;
  return base;
}

Vec TokenModel::pitchRepr(int chroma, int octave) const {
  if (octave < 0 || octave >= kNumOctaves)
    raise(ErrorCode::IndexOutOfRange, "octave outside the grid range");
  Vec pitch = embeddingLookup(store_->value("chroma_table"), chroma);
  if (octave != 0) {
    const Vec base = octaveBase();
    for (int j = 0; j < cfg_.d; ++j) pitch[j] += octave * base[j];
  }
  return pitch;
}

DenseRefs TokenModel::fusionRefs(bool melodic) const {
  const char* w = melodic ? "fusion_melodic_w" : "fusion_harmonic_w";
  const char* b = melodic ? "fusion_melodic_b" : "fusion_harmonic_b";
  return DenseRefs{&store_->value(w), &store_->value(b), &store_->grad(w), &store_->grad(b)};
}

Vec TokenModel::embed(const NoteEvent& e, bool melodic, TokenCache& cache) const {
  const auto& f = cfg_.features;
  cache.chroma = e.chroma;
  cache.octave = f.octave ? e.octave : 0;
  cache.velocity = e.velocity;
  cache.state = e.state;
  cache.melodic = melodic;

  Vec x;
  x.reserve(static_cast<size_t>(melodic ? melodicInputDim() : harmonicInputDim()));
  if (f.chroma) {
    const Vec pitch = pitchRepr(e.chroma, cache.octave);
    x.insert(x.end(), pitch.begin(), pitch.end());
  }
  if (melodic && f.ioi) {
    const Vec enc = sinusoidalEncode(e.ioi, cfg_.d);
    x.insert(x.end(), enc.begin(), enc.end());
  }
  if (f.velocity) {
    const Vec v = embeddingLookup(store_->value("velocity_table"), e.velocity);
    x.insert(x.end(), v.begin(), v.end());
  }
  if (f.state) {
    const Vec s = embeddingLookup(store_->value("state_table"), e.state);
    x.insert(x.end(), s.begin(), s.end());
  }
  return denseForward(fusionRefs(melodic), x, true, cache.dense);
}

void TokenModel::embedBackward(const Vec& dOut, const TokenCache& cache) const {
  const auto& f = cfg_.features;
  const Vec dx = denseBackward(fusionRefs(cache.melodic), cache.dense, dOut, true);

  size_t offset = 0;
  const size_t d = static_cast<size_t>(cfg_.d);
  if (f.chroma) {
    const Vec dPitch(dx.begin() + offset, dx.begin() + offset + d);
    embeddingAccumulate(store_->grad("chroma_table"), cache.chroma, dPitch);
    if (cache.octave != 0) {
      // pitch depends on the pooled base: each pitch-class row gets o/12.
      const double scale = static_cast<double>(cache.octave) / kPitchClasses;
      Tensor& grad = store_->grad("chroma_table");
      for (int pc = 0; pc < kPitchClasses; ++pc)
        embeddingAccumulate(grad, pc, dPitch, scale);
    }
    offset += d;
  }
  if (cache.melodic && f.ioi) offset += d;  // fixed encoding, no gradient
  if (f.velocity) {
    const Vec dv(dx.begin() + offset, dx.begin() + offset + d);
    embeddingAccumulate(store_->grad("velocity_table"), cache.velocity, dv);
    offset += d;
  }
  if (f.state) {
    const Vec ds(dx.begin() + offset, dx.begin() + offset + d);
    embeddingAccumulate(store_->grad("state_table"), cache.state, ds);
  }
}

}  // namespace pirhdy
