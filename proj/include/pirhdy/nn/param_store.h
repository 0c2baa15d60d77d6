#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "pirhdy/nn/tensor.h"
#include "pirhdy/util/rng.h"

namespace pirhdy {

enum class ParamInit {
  Zeros,
  FanIn,      // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), fan_in = last dim
  Embedding,  // normal(0, 0.1)
};

/// Named parameters with paired gradients and Adam moments, kept in
/// registration order so every traversal is deterministic.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
  };

  Tensor& add(const std::string& name, std::vector<int> shape, ParamInit init, RngStream& rng);

  bool has(const std::string& name) const { return index_.count(name) > 0; }
  Tensor& value(const std::string& name) { return entry(name).value; }
  const Tensor& value(const std::string& name) const { return entry(name).value; }
  Tensor& grad(const std::string& name) { return entry(name).grad; }

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  int64_t stepCount() const { return step_; }

  void zeroGrads();

  /// Adam with bias correction; throws NonFiniteGradient on NaN/Inf grads.
  /// Gradients are zeroed afterwards and the step counter advances.
  void adamStep(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Model file (.prm): magic "PRHD", u16 version, u16 d, then per tensor
  /// (u16 name length, name, u8 rank, u32 dims..., f64 data...).
  void save(const std::string& path, int d) const;
  /// Returns the stored d; replaces current contents (moments reset).
  static std::pair<ParamStore, int> load(const std::string& path);

 private:
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  std::vector<Entry> entries_;
  std::unordered_map<std::string, size_t> index_;
  int64_t step_{0};
};

}  // namespace pirhdy
