#pragma once

#include <functional>
#include <string>

#include "pirhdy/nn/param_store.h"

namespace pirhdy {

struct GradCheckResult {
  double maxRelError{0.0};
  std::string worstParam;
  int64_t checked{0};
};

/// Compare analytic gradients against central finite differences (step h)
/// on a random `fraction` of all parameter elements (at least one).
/// `lossAndGrad` must deterministically compute the loss and accumulate
/// gradients into the store from its current values. Relative error is
/// |g_a - g_n| / max(|g_a|, |g_n|, 1e-8). Gradients are left zeroed.
GradCheckResult gradientCheck(ParamStore& store, const std::function<double()>& lossAndGrad,
                              RngStream& rng, double fraction = 0.01, double h = 1e-5);

}  // namespace pirhdy
