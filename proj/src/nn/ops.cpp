#include "pirhdy/nn/ops.h"

#include <algorithm>
#include <cmath>

namespace pirhdy {
namespace {

/// y += W x (W: out x in).
void matVec(const Tensor& W, const double* x, double* y) {
  const int out = W.shape[0];
  const int in = W.shape[1];
  for (int i = 0; i < out; ++i) {
    const double* row = W.row(i);
    double acc = 0.0;
    for (int j = 0; j < in; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

/// dx += W^T dy; dW += dy x^T.
void matVecBackward(const Tensor& W, Tensor& dW, const double* x, double* dx, const double* dy) {
  const int out = W.shape[0];
  const int in = W.shape[1];
  for (int i = 0; i < out; ++i) {
    const double g = dy[i];
    if (g == 0.0) continue;
    const double* row = W.row(i);
    double* dRow = dW.row(i);
    for (int j = 0; j < in; ++j) {
      dRow[j] += g * x[j];
      dx[j] += g * row[j];
    }
  }
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vec embeddingLookup(const Tensor& table, int index) {
  if (index < 0 || index >= table.shape[0])
    raise(ErrorCode::IndexOutOfRange,
          "embedding index " + std::to_string(index) + " out of " +
              std::to_string(table.shape[0]));
  return Vec(table.row(index), table.row(index) + table.cols());
}

void embeddingAccumulate(Tensor& gradTable, int index, const Vec& grad, double scale) {
  if (index < 0 || index >= gradTable.shape[0])
    raise(ErrorCode::IndexOutOfRange, "embedding gradient index out of range");
  double* row = gradTable.row(index);
  for (size_t j = 0; j < grad.size(); ++j) row[j] += scale * grad[j];
}

Vec sinusoidalEncode(int ioi, int d) {
  if (d % 2 != 0) raise(ErrorCode::OddDimension, "sinusoidal encoding needs even dimension");
  Vec out(static_cast<size_t>(d));
  for (int j = 0; 2 * j < d; ++j) {
    const double angle = ioi / std::pow(10000.0, (2.0 * j) / d);
    out[2 * j] = std::sin(angle);
    out[2 * j + 1] = std::cos(angle);
  }
  return out;
}

Vec denseForward(const DenseRefs& refs, const Vec& x, bool tanhAct, DenseCache& cache) {
  if (static_cast<int>(x.size()) != refs.W->shape[1])
    raise(ErrorCode::ShapeMismatch, "dense input size mismatch");
  const int out = refs.W->shape[0];
  Vec y(refs.b->data);
  matVec(*refs.W, x.data(), y.data());
  if (tanhAct)
    for (int i = 0; i < out; ++i) y[i] = std::tanh(y[i]);
  cache.x = x;
  cache.y = y;
  return y;
}

Vec denseBackward(const DenseRefs& refs, const DenseCache& cache, const Vec& dy, bool tanhAct) {
  const int out = refs.W->shape[0];
  Vec dPre(dy);
  if (tanhAct)
    for (int i = 0; i < out; ++i) dPre[i] *= 1.0 - cache.y[i] * cache.y[i];
  Vec dx(cache.x.size(), 0.0);
  matVecBackward(*refs.W, *refs.dW, cache.x.data(), dx.data(), dPre.data());
  for (int i = 0; i < out; ++i) refs.db->data[i] += dPre[i];
  return dx;
}

VecSeq gruForward(const GruRefs& refs, const VecSeq& inputs, GruCache& cache) {
  if (inputs.empty()) raise(ErrorCode::EmptySequence, "GRU over empty sequence");
  const int h3 = refs.Wx->shape[0];
  const int h = h3 / 3;
  const size_t T = inputs.size();

  cache.x = inputs;
  cache.hPrev.assign(T, Vec(h, 0.0));
  cache.z.assign(T, Vec(h));
  cache.r.assign(T, Vec(h));
  cache.c.assign(T, Vec(h));
  cache.un.assign(T, Vec(h));

  VecSeq hidden(T, Vec(h));
  Vec hPrev(h, 0.0);
  Vec ax(h3), ah(h3);
  for (size_t t = 0; t < T; ++t) {
    cache.hPrev[t] = hPrev;
    ax = refs.b->data;
    matVec(*refs.Wx, inputs[t].data(), ax.data());
    std::fill(ah.begin(), ah.end(), 0.0);
    matVec(*refs.Uh, hPrev.data(), ah.data());
    for (int i = 0; i < h; ++i) {
      const double z = sigmoid(ax[i] + ah[i]);
      const double r = sigmoid(ax[h + i] + ah[h + i]);
      const double un = ah[2 * h + i];
      const double c = std::tanh(ax[2 * h + i] + r * un);
      cache.z[t][i] = z;
      cache.r[t][i] = r;
      cache.un[t][i] = un;
      cache.c[t][i] = c;
      hidden[t][i] = (1.0 - z) * c + z * hPrev[i];
    }
    hPrev = hidden[t];
  }
  return hidden;
}

VecSeq gruBackward(const GruRefs& refs, const GruCache& cache, const VecSeq& dH) {
  const int h3 = refs.Wx->shape[0];
  const int h = h3 / 3;
  const size_t T = cache.x.size();

  VecSeq dInputs(T, Vec(cache.x[0].size(), 0.0));
  Vec dhNext(h, 0.0);  // gradient flowing into h_t from step t+1
  Vec dax(h3), dah(h3);
  for (size_t ti = T; ti-- > 0;) {
    Vec dh(h);
    for (int i = 0; i < h; ++i) dh[i] = dH[ti][i] + dhNext[i];

    std::fill(dhNext.begin(), dhNext.end(), 0.0);
    for (int i = 0; i < h; ++i) {
      const double z = cache.z[ti][i];
      const double r = cache.r[ti][i];
      const double c = cache.c[ti][i];
      const double un = cache.un[ti][i];
      const double hp = cache.hPrev[ti][i];

      const double dc = dh[i] * (1.0 - z);
      const double dz = dh[i] * (hp - c);
      dhNext[i] += dh[i] * z;

      const double dcPre = dc * (1.0 - c * c);  // into tanh argument
      const double dr = dcPre * un;
      const double dun = dcPre * r;

      dax[i] = dz * z * (1.0 - z);
      dax[h + i] = dr * r * (1.0 - r);
      dax[2 * h + i] = dcPre;
      dah[i] = dax[i];
      dah[h + i] = dax[h + i];
      dah[2 * h + i] = dun;
    }
    matVecBackward(*refs.Wx, *refs.dWx, cache.x[ti].data(), dInputs[ti].data(), dax.data());
    matVecBackward(*refs.Uh, *refs.dUh, cache.hPrev[ti].data(), dhNext.data(), dah.data());
    for (int i = 0; i < h3; ++i) refs.db->data[i] += dax[i];
  }
  return dInputs;
}

Vec softmax(const Vec& scores) {
  const double peak = *std::max_element(scores.begin(), scores.end());
  Vec out(scores.size());
  double total = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - peak);
    total += out[i];
  }
  for (auto& w : out) w /= total;
  return out;
}

Vec attentionForward(const AttnRefs& refs, const VecSeq& H, AttnCache& cache) {
  if (H.empty()) raise(ErrorCode::EmptySequence, "attention over empty sequence");
  const int da = refs.W->shape[0];
  const int dh = refs.W->shape[1];
  const size_t T = H.size();

  cache.h = H;
  cache.e.assign(T, Vec(da));
  Vec scores(T);
  for (size_t t = 0; t < T; ++t) {
    Vec e(refs.b->data);
    matVec(*refs.W, H[t].data(), e.data());
    double s = 0.0;
    for (int i = 0; i < da; ++i) {
      e[i] = std::tanh(e[i]);
      s += refs.u->data[i] * e[i];
    }
    cache.e[t] = std::move(e);
    scores[t] = s;
  }
  cache.w = softmax(scores);

  Vec out(dh, 0.0);
  for (size_t t = 0; t < T; ++t)
    for (int i = 0; i < dh; ++i) out[i] += cache.w[t] * H[t][i];
  return out;
}

void attentionBackward(const AttnRefs& refs, const AttnCache& cache, const Vec& dOut,
                       VecSeq& dH) {
  const int da = refs.W->shape[0];
  const int dh = refs.W->shape[1];
  const size_t T = cache.h.size();

  // Direct path through the convex combination, and dL/dw.
  Vec dw(T);
  for (size_t t = 0; t < T; ++t) {
    double acc = 0.0;
    for (int i = 0; i < dh; ++i) {
      acc += dOut[i] * cache.h[t][i];
      dH[t][i] += cache.w[t] * dOut[i];
    }
    dw[t] = acc;
  }
  // Softmax backward: ds_t = w_t (dw_t - sum_k w_k dw_k).
  double mix = 0.0;
  for (size_t t = 0; t < T; ++t) mix += cache.w[t] * dw[t];
  for (size_t t = 0; t < T; ++t) {
    const double ds = cache.w[t] * (dw[t] - mix);
    Vec dPre(da);
    for (int i = 0; i < da; ++i) {
      const double de = ds * refs.u->data[i];
      refs.du->data[i] += ds * cache.e[t][i];
      dPre[i] = de * (1.0 - cache.e[t][i] * cache.e[t][i]);
      refs.db->data[i] += dPre[i];
    }
    matVecBackward(*refs.W, *refs.dW, cache.h[t].data(), dH[t].data(), dPre.data());
  }
}

double bceWithLogits(const Vec& logits, const std::vector<uint8_t>& labels, Vec& dz) {
  const size_t n = logits.size();
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double z = logits[i];
    const double y = labels[i];
    // max(z,0) - z y + log(1 + exp(-|z|))
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    dz.push_back((sigmoid(z) - y) / static_cast<double>(n));
  }
  return loss / static_cast<double>(n);
}

}  // namespace pirhdy
