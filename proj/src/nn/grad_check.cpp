#include "pirhdy/nn/grad_check.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace pirhdy {

GradCheckResult gradientCheck(ParamStore& store, const std::function<double()>& lossAndGrad,
                              RngStream& rng, double fraction, double h) {
  store.zeroGrads();
  lossAndGrad();

  // Snapshot analytic gradients over a flat index space.
  std::vector<std::pair<size_t, size_t>> layout;  // (entry, offset) per flat index
  std::vector<double> analytic;
  for (size_t e = 0; e < store.entries().size(); ++e)
    for (size_t i = 0; i < store.entries()[e].grad.data.size(); ++i) {
      layout.emplace_back(e, i);
      analytic.push_back(store.entries()[e].grad.data[i]);
    }
  store.zeroGrads();

  const size_t total = layout.size();
  size_t want = std::max<size_t>(1, static_cast<size_t>(std::llround(fraction * total)));
  want = std::min(want, total);
  std::set<size_t> picked;
  while (picked.size() < want) picked.insert(static_cast<size_t>(rng.uniformInt(total)));

  GradCheckResult result;
  for (size_t flat : picked) {
    auto [e, i] = layout[flat];
    double& theta = store.entries()[e].value.data[i];
    const double saved = theta;

    theta = saved + h;
    const double lossPlus = lossAndGrad();
    store.zeroGrads();
    theta = saved - h;
    const double lossMinus = lossAndGrad();
    store.zeroGrads();
    theta = saved;

    const double numeric = (lossPlus - lossMinus) / (2.0 * h);
    const double ga = analytic[flat];
    const double rel = std::abs(ga - numeric) / std::max({std::abs(ga), std::abs(numeric), 1e-8});
    if (rel > result.maxRelError) {
      result.maxRelError = rel;
      result.worstParam = store.entries()[e].name + "[" + std::to_string(i) + "]";
    }
    ++result.checked;
  }
  return result;
}

}  // namespace pirhdy
