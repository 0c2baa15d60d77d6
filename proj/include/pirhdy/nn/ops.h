#pragma once

#include <cstdint>
#include <vector>

#include "pirhdy/nn/tensor.h"

namespace pirhdy {


/// Copy of table row `index`; bounds-checked.
Vec embeddingLookup(const Tensor& table, int index);
/// Sparse gradient accumulation into the indexed row.
void embeddingAccumulate(Tensor& gradTable, int index, const Vec& grad, double scale = 1.0);

/// Trigonometric interval encoding: dims (2j, 2j+1) = (sin, cos) of
/// ioi / 10000^(2j/d). Parameter-free; throws OddDimension.
Vec sinusoidalEncode(int ioi, int d);

// ---- Dense layer: y = act(W x + b), act = tanh or identity ----

struct DenseRefs {
  const Tensor* W;  // out x in
  const Tensor* b;  // out
  Tensor* dW;
  Tensor* db;
};

struct DenseCache {
  Vec x;
  Vec y;
};

Vec denseForward(const DenseRefs& refs, const Vec& x, bool tanhAct, DenseCache& cache);
/// Returns dx; accumulates into dW/db.
Vec denseBackward(const DenseRefs& refs, const DenseCache& cache, const Vec& dy, bool tanhAct);

// ---- GRU cell over a sequence, zero initial hidden state ----
//
// Gates packed as [z; r; n] along the first axis:
//   z = sigmoid(Wx_z x + Uh_z h + b_z)
//   r = sigmoid(Wx_r x + Uh_r h + b_r)
//   c = tanh(Wx_n x + r * (Uh_n h) + b_n)
//   h' = (1 - z) * c + z * h

struct GruRefs {
  const Tensor* Wx;  // 3h x in
  const Tensor* Uh;  // 3h x h
  const Tensor* b;   // 3h
  Tensor* dWx;
  Tensor* dUh;
  Tensor* db;
};

struct GruCache {
  VecSeq x, hPrev, z, r, c, un;  // per timestep; un = Uh_n * hPrev
};

/// All hidden states h_1..h_T. Throws EmptySequence.
VecSeq gruForward(const GruRefs& refs, const VecSeq& inputs, GruCache& cache);
/// dH holds per-step upstream gradients; returns per-step dx.
VecSeq gruBackward(const GruRefs& refs, const GruCache& cache, const VecSeq& dH);

// ---- Additive attention pooling ----
//
// s_t = u . tanh(W h_t + b); weights = softmax(s); out = sum w_t h_t.

struct AttnRefs {
  const Tensor* W;  // d_a x d_h
  const Tensor* b;  // d_a
  const Tensor* u;  // d_a
  Tensor* dW;
  Tensor* db;
  Tensor* du;
};

struct AttnCache {
  VecSeq h, e;  // inputs and tanh projections
  Vec w;        // softmax weights
};

Vec attentionForward(const AttnRefs& refs, const VecSeq& H, AttnCache& cache);
/// Accumulates per-step input grads into dH (sized like cache.h).
void attentionBackward(const AttnRefs& refs, const AttnCache& cache, const Vec& dOut, VecSeq& dH);

/// Numerically stable softmax; output sums to 1.
Vec softmax(const Vec& scores);

/// Mean binary cross-entropy with logits over the label vector;
/// dz[i] = (sigmoid(z[i]) - y[i]) / n appended into dz.
double bceWithLogits(const Vec& logits, const std::vector<uint8_t>& labels, Vec& dz);

double sigmoid(double z);

}  // namespace pirhdy
