#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "pirhdy/util/errors.h"

namespace pirhdy {

using Vec = std::vector<double>;
using VecSeq = std::vector<Vec>;

/// Row-major 64-bit float tensor, rank 1 or 2 in practice.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    int64_t n = 1;
    for (int dim : shape) {
      if (dim <= 0) raise(ErrorCode::ShapeMismatch, "non-positive tensor dimension");
      n *= dim;
    }
    data.assign(static_cast<size_t>(n), 0.0);
  }

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& operator()(int i) { return data[static_cast<size_t>(i)]; }
  double operator()(int i) const { return data[static_cast<size_t>(i)]; }
  double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols() + j]; }
  double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols() + j]; }

  double* row(int i) { return data.data() + static_cast<size_t>(i) * cols(); }
  const double* row(int i) const { return data.data() + static_cast<size_t>(i) * cols(); }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

}  // namespace pirhdy
