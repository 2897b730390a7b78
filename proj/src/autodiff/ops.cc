// Copyright (c) 2026 The pdnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pdnet/autodiff/ops.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#ifdef __AVX512F__
#include <immintrin.h>
#endif

namespace pdnet {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

void Require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

template <typename T>
void SameTape(const BasicVar<T>& a, const BasicVar<T>& b) {
  if (!a.valid() || a.tape() != b.tape()) {
    throw UsageError("operands recorded on different tapes");
  }
}

struct ConvGeometry {
  int cin, h, w, cout, kh, kw, stride, ho, wo;
  int k() const { return cin * kh * kw; }
  int p() const { return ho * wo; }
};

// dst[0..n) = src[0..n) and dst[0..n) += src[0..n). Output rows of the
// classifier convolutions are narrower than one vector register, so the
// float versions finish with a masked tail instead of a scalar loop.
template <typename T>
inline void CopyRow(T* dst, const T* src, int n) {
  std::copy(src, src + n, dst);
}

template <typename T>
inline void AddRow(T* dst, const T* src, int n) {
  for (int i = 0; i < n; ++i) dst[i] += src[i];
}

#ifdef __AVX512F__
template <>
inline void CopyRow<float>(float* dst, const float* src, int n) {
  int i = 0;
  for (; i + 16 <= n; i += 16) _mm512_storeu_ps(dst + i, _mm512_loadu_ps(src + i));
  if (i < n) {
    const __mmask16 m = static_cast<__mmask16>((1u << (n - i)) - 1);
    _mm512_mask_storeu_ps(dst + i, m, _mm512_maskz_loadu_ps(m, src + i));
  }
}

template <>
inline void AddRow<float>(float* dst, const float* src, int n) {
  int i = 0;
  for (; i + 16 <= n; i += 16) {
    _mm512_storeu_ps(dst + i, _mm512_add_ps(_mm512_loadu_ps(dst + i), _mm512_loadu_ps(src + i)));
  }
  if (i < n) {
    const __mmask16 m = static_cast<__mmask16>((1u << (n - i)) - 1);
    _mm512_mask_storeu_ps(
        dst + i, m, _mm512_add_ps(_mm512_maskz_loadu_ps(m, dst + i), _mm512_maskz_loadu_ps(m, src + i)));
  }
}
#endif

// cols is (cin*kh*kw) x (ho*wo), row-major.
template <typename T>
void Im2Col(const T* x, const ConvGeometry& g, T* cols) {
  const int p = g.p();
  for (int c = 0; c < g.cin; ++c) {
    for (int i = 0; i < g.kh; ++i) {
      for (int j = 0; j < g.kw; ++j) {
        T* dst = cols + static_cast<size_t>((c * g.kh + i) * g.kw + j) * p;
        for (int oy = 0; oy < g.ho; ++oy) {
          const T* src = x + (static_cast<size_t>(c) * g.h + oy * g.stride + i) * g.w + j;
          T* row = dst + static_cast<size_t>(oy) * g.wo;
          if (g.stride == 1) {
            CopyRow(row, src, g.wo);
          } else {
            for (int ox = 0; ox < g.wo; ++ox) row[ox] = src[ox * g.stride];
          }
        }
      }
    }
  }
}

template <typename T>
void Col2ImAdd(const T* cols, const ConvGeometry& g, T* dx) {
  const int p = g.p();
  for (int c = 0; c < g.cin; ++c) {
    for (int i = 0; i < g.kh; ++i) {
      for (int j = 0; j < g.kw; ++j) {
        const T* src = cols + static_cast<size_t>((c * g.kh + i) * g.kw + j) * p;
        for (int oy = 0; oy < g.ho; ++oy) {
          T* dst = dx + (static_cast<size_t>(c) * g.h + oy * g.stride + i) * g.w + j;
          const T* row = src + static_cast<size_t>(oy) * g.wo;
          if (g.stride == 1) {
            AddRow(dst, row, g.wo);
          } else {
            for (int ox = 0; ox < g.wo; ++ox) dst[ox * g.stride] += row[ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
BasicVar<T> Conv2dValid(BasicVar<T> input, BasicVar<T> weights, BasicVar<T> bias,
                        int stride) {
  SameTape(input, weights);
  SameTape(input, bias);
  const auto& x = input.value();
  const auto& w = weights.value();
  const auto& b = bias.value();
  Require(x.rank() == 3, "conv2d input must be C_in x H x W, got " + ShapeToString(x.shape()));
  Require(w.rank() == 4, "conv2d weights must be C_out x C_in x kH x kW, got " +
                             ShapeToString(w.shape()));
  if (stride < 1) throw ConfigError("conv2d stride must be positive");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), w.dim(0), w.dim(2), w.dim(3), stride, 0, 0};
  Require(w.dim(1) == g.cin, "conv2d channel mismatch: input axis 0 has " +
                                 std::to_string(g.cin) + ", weights axis 1 has " +
                                 std::to_string(w.dim(1)));
  Require(b.size() == static_cast<size_t>(g.cout),
          "conv2d bias length " + std::to_string(b.size()) + " != C_out " +
              std::to_string(g.cout));
  Require(g.kh <= g.h, "conv2d kernel height " + std::to_string(g.kh) +
                           " exceeds input axis 1 extent " + std::to_string(g.h));
  Require(g.kw <= g.w, "conv2d kernel width " + std::to_string(g.kw) +
                           " exceeds input axis 2 extent " + std::to_string(g.w));
  g.ho = (g.h - g.kh) / stride + 1;
  g.wo = (g.w - g.kw) / stride + 1;

  // Fully overwritten by Im2Col, so left uninitialized.
  std::shared_ptr<T[]> cols(
      static_cast<T*>(::operator new(static_cast<size_t>(g.k()) * g.p() * sizeof(T),
                                     std::align_val_t{kBufferAlignment})),
      [](T* ptr) { ::operator delete(ptr, std::align_val_t{kBufferAlignment}); });
  Im2Col(x.raw(), g, cols.get());

  BasicTensor<T> out({g.cout, g.ho, g.wo});
  MatMap<T> out_m(out.raw(), g.cout, g.p());
  out_m.noalias() = ConstMatMap<T>(w.raw(), g.cout, g.k()) *
                    ConstMatMap<T>(cols.get(), g.k(), g.p());
  out_m.colwise() += ConstVecMap<T>(b.raw(), g.cout);

  const int xid = input.id(), wid = weights.id(), bid = bias.id();
  return input.tape()->Record(
      std::move(out), {input, weights, bias},
      [g, xid, wid, bid, cols](BasicTape<T>& tape, std::span<const T> go) {
        ConstMatMap<T> gout(go.data(), g.cout, g.p());
        if (tape.requires_grad(wid)) {
          MatMap<T>(tape.grad(wid).data(), g.cout, g.k()).noalias() +=
              gout * ConstMatMap<T>(cols.get(), g.k(), g.p()).transpose();
        }
        if (tape.requires_grad(bid)) {
          VecMap<T>(tape.grad(bid).data(), g.cout) += gout.rowwise().sum();
        }
        if (tape.requires_grad(xid)) {
          // One input channel at a time keeps the column buffer cache-resident.
          const int taps = g.kh * g.kw;
          ConvGeometry one = g;
          one.cin = 1;
          thread_local AlignedVector<T> scratch;
          scratch.resize(static_cast<size_t>(taps) * g.p());
          ConstMatMap<T> w(tape.value(wid).raw(), g.cout, g.k());
          T* dx = tape.grad(xid).data();
          for (int c = 0; c < g.cin; ++c) {
            MatMap<T>(scratch.data(), taps, g.p()).noalias() =
                w.middleCols(c * taps, taps).transpose() * gout;
            Col2ImAdd(scratch.data(), one, dx + static_cast<size_t>(c) * g.h * g.w);
          }
        }
      });
}

template <typename T>
BasicVar<T> MaxPool2d(BasicVar<T> input, int kernel, int stride) {
  const auto& x = input.value();
  Require(x.rank() == 3, "maxpool input must be C x H x W, got " + ShapeToString(x.shape()));
  if (kernel < 1 || stride < 1) throw ConfigError("maxpool kernel and stride must be positive");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Require(h >= kernel && w >= kernel, "maxpool input " + ShapeToString(x.shape()) +
                                          " smaller than window " + std::to_string(kernel));
  const int ho = (h - kernel) / stride + 1, wo = (w - kernel) / stride + 1;
  BasicTensor<T> out({c, ho, wo});
  std::vector<int> argmax(out.size());
  size_t o = 0;
  for (int ch = 0; ch < c; ++ch) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox, ++o) {
        int best = (ch * h + oy * stride) * w + ox * stride;
        T best_v = x[static_cast<size_t>(best)];
        for (int i = 0; i < kernel; ++i) {
          for (int j = 0; j < kernel; ++j) {
            int idx = (ch * h + oy * stride + i) * w + ox * stride + j;
            // Strict comparison keeps the first maximum on ties.
            if (x[static_cast<size_t>(idx)] > best_v) {
              best_v = x[static_cast<size_t>(idx)];
              best = idx;
            }
          }
        }
        out[o] = best_v;
        argmax[o] = best;
      }
    }
  }
  const int xid = input.id();
  return input.tape()->Record(std::move(out), {input},
                              [xid, argmax = std::move(argmax)](BasicTape<T>& tape,
                                                                std::span<const T> go) {
                                auto gx = tape.grad(xid);
                                for (size_t i = 0; i < argmax.size(); ++i) {
                                  gx[static_cast<size_t>(argmax[i])] += go[i];
                                }
                              });
}

template <typename T>
BasicVar<T> Relu(BasicVar<T> input) {
  const auto& x = input.value();
  BasicTensor<T> out(x.shape());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  const int xid = input.id();
  return input.tape()->Record(std::move(out), {input},
                              [xid](BasicTape<T>& tape, std::span<const T> go) {
                                const auto& xv = tape.value(xid);
                                auto gx = tape.grad(xid);
                                for (size_t i = 0; i < go.size(); ++i) {
                                  if (xv[i] > T(0)) gx[i] += go[i];
                                }
                              });
}

template <typename T>
BasicVar<T> Dropout(BasicVar<T> input, double p, bool training, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(p));
  }
  if (!training || p == 0.0) return input;
  const auto& x = input.value();
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<T> mask(x.size());
  BasicTensor<T> out(x.shape());
  for (size_t i = 0; i < x.size(); ++i) {
    mask[i] = unif(rng) < p ? T(0) : scale;
    out[i] = x[i] * mask[i];
  }
  const int xid = input.id();
  return input.tape()->Record(std::move(out), {input},
                              [xid, mask = std::move(mask)](BasicTape<T>& tape,
                                                            std::span<const T> go) {
                                auto gx = tape.grad(xid);
                                for (size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * mask[i];
                              });
}

template <typename T>
BasicVar<T> Affine(BasicVar<T> input, BasicVar<T> weights, BasicVar<T> bias) {
  SameTape(input, weights);
  SameTape(input, bias);
  const auto& x = input.value();
  const auto& w = weights.value();
  const auto& b = bias.value();
  Require(w.rank() == 2, "affine weights must be m x n, got " + ShapeToString(w.shape()));
  const int m = w.dim(0), n = w.dim(1);
  Require(x.size() == static_cast<size_t>(n), "affine input length " + std::to_string(x.size()) +
                                                  " != weights axis 1 extent " +
                                                  std::to_string(n));
  Require(b.size() == static_cast<size_t>(m), "affine bias length " + std::to_string(b.size()) +
                                                  " != weights axis 0 extent " +
                                                  std::to_string(m));
  BasicTensor<T> out({m});
  VecMap<T>(out.raw(), m).noalias() =
      ConstMatMap<T>(w.raw(), m, n) * ConstVecMap<T>(x.raw(), n) + ConstVecMap<T>(b.raw(), m);
  const int xid = input.id(), wid = weights.id(), bid = bias.id();
  return input.tape()->Record(
      std::move(out), {input, weights, bias},
      [m, n, xid, wid, bid](BasicTape<T>& tape, std::span<const T> go) {
        ConstVecMap<T> g(go.data(), m);
        if (tape.requires_grad(wid)) {
          MatMap<T>(tape.grad(wid).data(), m, n).noalias() +=
              g * ConstVecMap<T>(tape.value(xid).raw(), n).transpose();
        }
        if (tape.requires_grad(bid)) VecMap<T>(tape.grad(bid).data(), m) += g;
        if (tape.requires_grad(xid)) {
          VecMap<T>(tape.grad(xid).data(), n).noalias() +=
              ConstMatMap<T>(tape.value(wid).raw(), m, n).transpose() * g;
        }
      });
}

template <typename T>
BasicVar<T> Reshape(BasicVar<T> input, Shape shape) {
  BasicTensor<T> out = input.value().Reshaped(std::move(shape));
  const int xid = input.id();
  return input.tape()->Record(std::move(out), {input},
                              [xid](BasicTape<T>& tape, std::span<const T> go) {
                                auto gx = tape.grad(xid);
                                for (size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
                              });
}

template <typename T>
BasicVar<T> Sum(BasicVar<T> input) {
  T total = T(0);
  for (T v : input.value().data()) total += v;
  const int xid = input.id();
  return input.tape()->Record(BasicTensor<T>({1}, total), {input},
                              [xid](BasicTape<T>& tape, std::span<const T> go) {
                                auto gx = tape.grad(xid);
                                for (auto& g : gx) g += go[0];
                              });
}

template <typename T>
std::vector<T> Softmax(std::span<const T> logits) {
  if (logits.empty()) throw DimensionError("softmax of an empty vector");
  T mx = *std::max_element(logits.begin(), logits.end());
  std::vector<T> p(logits.size());
  T total = T(0);
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

template <typename T>
CrossEntropyResult<T> SoftmaxCrossEntropy(BasicVar<T> logits, int label) {
  const auto& z = logits.value();
  const int n = static_cast<int>(z.size());
  if (label < 0 || label >= n) {
    throw InputError("class label " + std::to_string(label) + " outside [0, " +
                     std::to_string(n) + ")");
  }
  T mx = *std::max_element(z.data().begin(), z.data().end());
  T total = T(0);
  for (int i = 0; i < n; ++i) total += std::exp(z[static_cast<size_t>(i)] - mx);
  const T lse = mx + std::log(total);
  std::vector<T> probs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) probs[static_cast<size_t>(i)] = std::exp(z[static_cast<size_t>(i)] - lse);
  const T loss = lse - z[static_cast<size_t>(label)];
  const int zid = logits.id();
  BasicVar<T> out = logits.tape()->Record(
      BasicTensor<T>({1}, loss), {logits},
      [zid, label, probs](BasicTape<T>& tape, std::span<const T> go) {
        auto gz = tape.grad(zid);
        for (size_t i = 0; i < probs.size(); ++i) {
          gz[i] += go[0] * (probs[i] - (static_cast<int>(i) == label ? T(1) : T(0)));
        }
      });
  return {out, std::move(probs)};
}

template <typename T>
BasicVar<T> PairwiseEuclidean(BasicVar<T> test, BasicVar<T> reference, double eps) {
  SameTape(test, reference);
  const auto& t = test.value();
  const auto& r = reference.value();
  Require(t.rank() == 2 && r.rank() == 2, "pairwise distance inputs must be F x S matrices");
  Require(t.shape() == r.shape(), "pairwise distance shape mismatch: test " +
                                      ShapeToString(t.shape()) + " vs reference " +
                                      ShapeToString(r.shape()));
  const int f = t.dim(0), s = t.dim(1);
  // Frame-major copies so that each frame vector is contiguous.
  RowMat<T> tf = ConstMatMap<T>(t.raw(), f, s).transpose();
  RowMat<T> rf = ConstMatMap<T>(r.raw(), f, s).transpose();
  const T e = static_cast<T>(eps);
  BasicTensor<T> out({s, s});
  for (int i = 0; i < s; ++i) {
    const T* ti = tf.data() + static_cast<size_t>(i) * f;
    for (int j = 0; j < s; ++j) {
      const T* rj = rf.data() + static_cast<size_t>(j) * f;
      T acc = T(0);
      for (int k = 0; k < f; ++k) {
        T d = ti[k] - rj[k];
        acc += d * d;
      }
      out.at(i, j) = std::sqrt(acc + e);
    }
  }
  std::vector<T> dist(out.data().begin(), out.data().end());
  const int tid = test.id(), rid = reference.id();
  return test.tape()->Record(
      std::move(out), {test, reference},
      [f, s, tid, rid, tf = std::move(tf), rf = std::move(rf), dist = std::move(dist)](
          BasicTape<T>& tape, std::span<const T> go) {
        // dD[i][j]/dt[:,i] = (t_i - r_j) / D[i][j] = -dD[i][j]/dr[:,j].
        RowMat<T> gt = RowMat<T>::Zero(s, f), gr = RowMat<T>::Zero(s, f);
        for (int i = 0; i < s; ++i) {
          const T* ti = tf.data() + static_cast<size_t>(i) * f;
          T* gti = gt.data() + static_cast<size_t>(i) * f;
          for (int j = 0; j < s; ++j) {
            const size_t ij = static_cast<size_t>(i) * s + j;
            if (go[ij] == T(0)) continue;
            const T coef = go[ij] / dist[ij];
            const T* rj = rf.data() + static_cast<size_t>(j) * f;
            T* grj = gr.data() + static_cast<size_t>(j) * f;
            for (int k = 0; k < f; ++k) {
              const T d = coef * (ti[k] - rj[k]);
              gti[k] += d;
              grj[k] -= d;
            }
          }
        }
        if (tape.requires_grad(tid)) {
          MatMap<T>(tape.grad(tid).data(), f, s) += gt.transpose();
        }
        if (tape.requires_grad(rid)) {
          MatMap<T>(tape.grad(rid).data(), f, s) += gr.transpose();
        }
      });
}

Tensor PairwiseKl(const Tensor& test, const Tensor& reference, double floor) {
  Require(test.rank() == 2 && reference.rank() == 2,
          "pairwise KL inputs must be F x S matrices");
  Require(test.shape() == reference.shape(), "pairwise KL shape mismatch: test " +
                                                 ShapeToString(test.shape()) + " vs reference " +
                                                 ShapeToString(reference.shape()));
  if (!(floor > 0.0)) throw ConfigError("KL floor must be positive");
  const int f = test.dim(0), s = test.dim(1);
  // Returns frame-major normalized probabilities and their logs.
  auto normalize = [&](const Tensor& m, const char* which) {
    std::vector<double> p(static_cast<size_t>(f) * s), lp(p.size());
    for (int j = 0; j < s; ++j) {
      double total = 0.0;
      for (int k = 0; k < f; ++k) {
        const double v = m.at(k, j);
        if (!std::isfinite(v)) {
          throw InputError(std::string("non-finite value in ") + which + " at feature " +
                           std::to_string(k) + ", frame " + std::to_string(j));
        }
        const double c = std::max(v, floor);
        p[static_cast<size_t>(j) * f + k] = c;
        total += c;
      }
      for (int k = 0; k < f; ++k) {
        double& v = p[static_cast<size_t>(j) * f + k];
        v /= total;
        lp[static_cast<size_t>(j) * f + k] = std::log(v);
      }
    }
    return std::make_pair(std::move(p), std::move(lp));
  };
  auto [tp, tl] = normalize(test, "test");
  auto [rp, rl] = normalize(reference, "reference");
  Tensor out({s, s});
  for (int i = 0; i < s; ++i) {
    const double* pi = tp.data() + static_cast<size_t>(i) * f;
    const double* li = tl.data() + static_cast<size_t>(i) * f;
    for (int j = 0; j < s; ++j) {
      const double* lj = rl.data() + static_cast<size_t>(j) * f;
      double acc = 0.0;
      for (int k = 0; k < f; ++k) acc += pi[k] * (li[k] - lj[k]);
      out.at(i, j) = static_cast<float>(std::max(acc, 0.0));
    }
  }
  return out;
}

template <typename T>
void SgdStep(BasicParameterSet<T>& params, double lr) {
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be non-negative");
  const T step = static_cast<T>(lr);
  for (auto& p : params) {
    if (!p.tensor.has_grad()) throw UsageError("parameter " + p.name + " has no gradient");
    auto w = p.tensor.data();
    auto g = p.tensor.grad();
    for (size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
    p.tensor.ZeroGrad();
  }
}

#define PDNET_INSTANTIATE_OPS(T)                                                          \
  template BasicVar<T> Conv2dValid<T>(BasicVar<T>, BasicVar<T>, BasicVar<T>, int);        \
  template BasicVar<T> MaxPool2d<T>(BasicVar<T>, int, int);                               \
  template BasicVar<T> Relu<T>(BasicVar<T>);                                              \
  template BasicVar<T> Dropout<T>(BasicVar<T>, double, bool, std::mt19937_64&);           \
  template BasicVar<T> Affine<T>(BasicVar<T>, BasicVar<T>, BasicVar<T>);                  \
  template BasicVar<T> Reshape<T>(BasicVar<T>, Shape);                                    \
  template BasicVar<T> Sum<T>(BasicVar<T>);                                               \
  template CrossEntropyResult<T> SoftmaxCrossEntropy<T>(BasicVar<T>, int);                \
  template std::vector<T> Softmax<T>(std::span<const T>);                                 \
  template BasicVar<T> PairwiseEuclidean<T>(BasicVar<T>, BasicVar<T>, double);            \
  template void SgdStep<T>(BasicParameterSet<T>&, double);

PDNET_INSTANTIATE_OPS(float)
PDNET_INSTANTIATE_OPS(double)

#undef PDNET_INSTANTIATE_OPS

}  // namespace pdnet
