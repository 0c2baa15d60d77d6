#include "pirhdy/nn/param_store.h"

#include <cmath>

#include "pirhdy/util/binio.h"

namespace pirhdy {

Tensor& ParamStore::add(const std::string& name, std::vector<int> shape, ParamInit init,
                        RngStream& rng) {
  if (index_.count(name)) raise(ErrorCode::BadConfig, "duplicate parameter: " + name);
  Entry entry;
  entry.name = name;
  entry.value = Tensor(shape);
  entry.grad = Tensor(shape);
  entry.m = Tensor(shape);
  entry.v = Tensor(shape);

  switch (init) {
    case ParamInit::Zeros:
      break;
    case ParamInit::FanIn: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(shape.back()));
      for (auto& x : entry.value.data) x = rng.uniform(-bound, bound);
      break;
    }
    case ParamInit::Embedding:
      for (auto& x : entry.value.data) x = rng.normal(0.0, 0.1);
      break;
  }

  index_[name] = entries_.size();
  entries_.push_back(std::move(entry));
  return entries_.back().value;
}

ParamStore::Entry& ParamStore::entry(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) raise(ErrorCode::BadConfig, "unknown parameter: " + name);
  return entries_[it->second];
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) raise(ErrorCode::BadConfig, "unknown parameter: " + name);
  return entries_[it->second];
}

void ParamStore::zeroGrads() {
  for (auto& e : entries_) e.grad.fill(0.0);
}

void ParamStore::adamStep(double lr, double beta1, double beta2, double eps) {
  const int64_t t = step_ + 1;
  const double correct1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double correct2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (auto& e : entries_) {
    for (size_t i = 0; i < e.value.data.size(); ++i) {
      const double g = e.grad.data[i];
      if (!std::isfinite(g))
        raise(ErrorCode::NonFiniteGradient, "non-finite gradient in " + e.name);
      e.m.data[i] = beta1 * e.m.data[i] + (1.0 - beta1) * g;
      e.v.data[i] = beta2 * e.v.data[i] + (1.0 - beta2) * g * g;
      const double mHat = e.m.data[i] / correct1;
      const double vHat = e.v.data[i] / correct2;
      e.value.data[i] -= lr * mHat / (std::sqrt(vHat) + eps);
    }
    e.grad.fill(0.0);
  }
  step_ = t;
}

void ParamStore::save(const std::string& path, int d) const {
  ByteWriter out;
  out.str("PRHD");
  out.u16(1);  // format version
  out.u16(static_cast<uint16_t>(d));
  for (const auto& e : entries_) {
    out.u16(static_cast<uint16_t>(e.name.size()));
    out.str(e.name);
    out.u8(static_cast<uint8_t>(e.value.shape.size()));
    for (int dim : e.value.shape) out.u32(static_cast<uint32_t>(dim));
    for (double x : e.value.data) out.f64(x);
  }
  out.writeFile(path);
}

std::pair<ParamStore, int> ParamStore::load(const std::string& path) {
  ByteReader in = ByteReader::fromFile(path);
  if (in.str(4) != "PRHD") raise(ErrorCode::BadFile, "not a model file: " + path);
  const uint16_t version = in.u16();
  if (version != 1) raise(ErrorCode::BadFile, "unsupported model file version");
  const int d = in.u16();

  ParamStore store;
  while (!in.atEnd()) {
    const uint16_t nameLen = in.u16();
    Entry entry;
    entry.name = in.str(nameLen);
    const uint8_t rank = in.u8();
    std::vector<int> shape;
    for (int i = 0; i < rank; ++i) shape.push_back(static_cast<int>(in.u32()));
    entry.value = Tensor(shape);
    for (auto& x : entry.value.data) x = in.f64();
    entry.grad = Tensor(shape);
    entry.m = Tensor(shape);
    entry.v = Tensor(shape);
    if (store.index_.count(entry.name))
      raise(ErrorCode::BadFile, "duplicate parameter in file: " + entry.name);
    store.index_[entry.name] = store.entries_.size();
    store.entries_.push_back(std::move(entry));
  }
  return {std::move(store), d};
}

}  // namespace pirhdy
