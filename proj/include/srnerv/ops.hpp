// Copyright 2026 The srnerv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Differentiable operators. Feature maps are [H, W, C] with channels
// innermost. Reductions over pixels accumulate in double.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "srnerv/tensor.hpp"

namespace srnerv {

namespace detail {

// Gradient buffer of input i, or nullptr when that input needs none.
template <typename T>
std::vector<T>* input_grad(Node<T>& node, std::size_t i) {
  Node<T>& parent = *node.parents[i];
  return parent.requires_grad ? &parent.grad_buffer() : nullptr;
}

template <typename T>
const std::vector<T>& input_value(Node<T>& node, std::size_t i) {
  return node.parents[i]->value;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

template <typename T>
void require_hwc(const Tensor<T>& x, const char* op) {
  require(x.rank() == 3, std::string(op) + ": expected [H,W,C], got " +
                             shape_str(x.shape()));
}

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// numpy-style "reflect": -1 -> 1, n -> n-2.
inline std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

template <typename T, typename F, typename DF>
Tensor<T> unary(const Tensor<T>& x, F f, DF df) {
  std::vector<T> out(x.numel());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
  return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [df](Node<T>& n) {
    auto* gx = input_grad(n, 0);
    if (!gx) return;
    const auto& xv = input_value(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      (*gx)[i] += n.grad[i] * df(xv[i], n.value[i]);
    }
  });
}

template <typename T>
void require_same(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise arithmetic on equal shapes.

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same(a, b, "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Tensor<T>::from_op(a.shape(), std::move(out), {a, b}, [](Node<T>& n) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* g = detail::input_grad(n, k)) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same(a, b, "sub");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Tensor<T>::from_op(a.shape(), std::move(out), {a, b}, [](Node<T>& n) {
    if (auto* g = detail::input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
    }
    if (auto* g = detail::input_grad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] -= n.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same(a, b, "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return Tensor<T>::from_op(a.shape(), std::move(out), {a, b}, [](Node<T>& n) {
    const auto& av = detail::input_value(n, 0);
    const auto& bv = detail::input_value(n, 1);
    if (auto* g = detail::input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * bv[i];
    }
    if (auto* g = detail::input_grad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * av[i];
    }
  });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same(a, b, "div");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] / b[i];
  return Tensor<T>::from_op(a.shape(), std::move(out), {a, b}, [](Node<T>& n) {
    const auto& bv = detail::input_value(n, 1);
    if (auto* g = detail::input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] / bv[i];
    }
    if (auto* g = detail::input_grad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        (*g)[i] -= n.grad[i] * n.value[i] / bv[i];
      }
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T s) {
  return detail::unary(
      x, [s](T v) { return v * s; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T s) {
  return detail::unary(
      x, [s](T v) { return v + s; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
  return detail::unary(
      x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

// d|x|/dx taken as 0 at x = 0.
template <typename T>
Tensor<T> abs(const Tensor<T>& x) {
  return detail::unary(
      x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return detail::unary(
      x, [](T v) { return T(1) / (T(1) + std::exp(-v)); },
      [](T, T y) { return y * (T(1) - y); });
}

// Exact-erf GELU: x * Phi(x).
template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  return detail::unary(
      x,
      [](T v) {
        return T(0.5) * v * (T(1) + std::erf(v * T(std::numbers::sqrt2 / 2)));
      },
      [](T v, T) {
        const T cdf = T(0.5) * (T(1) + std::erf(v * T(std::numbers::sqrt2 / 2)));
        const T pdf = std::exp(T(-0.5) * v * v) *
                      T(std::numbers::inv_sqrtpi / std::numbers::sqrt2);
        return cdf + v * pdf;
      });
}

// ---------------------------------------------------------------------------
// Reductions to a scalar.

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  double acc = 0.0;
  for (T v : x.values()) acc += static_cast<double>(v);
  return Tensor<T>::from_op(Shape{}, {static_cast<T>(acc)}, {x}, [](Node<T>& n) {
    if (auto* g = detail::input_grad(n, 0)) {
      for (auto& v : *g) v += n.grad[0];
    }
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  double acc = 0.0;
  for (T v : x.values()) acc += static_cast<double>(v);
  const double count = static_cast<double>(x.numel());
  return Tensor<T>::from_op(
      Shape{}, {static_cast<T>(acc / count)}, {x}, [count](Node<T>& n) {
        if (auto* g = detail::input_grad(n, 0)) {
          const T share = static_cast<T>(n.grad[0] / count);
          for (auto& v : *g) v += share;
        }
      });
}

// ---------------------------------------------------------------------------
// Spatial and channel mixing.

// Per-channel KxK filtering with zero padding ("same" output size).
template <typename T>
Tensor<T> depthwise_conv2d(const Tensor<T>& x, const Tensor<T>& k,
                           const Tensor<T>& b) {
  detail::require_hwc(x, "depthwise_conv2d");
  detail::require(k.rank() == 3 && k.dim(0) == k.dim(1) && k.dim(0) % 2 == 1,
                  "depthwise_conv2d: kernel must be [K,K,C] with odd K, got " +
                      shape_str(k.shape()));
  const std::size_t H = x.dim(0), W = x.dim(1), C = x.dim(2), K = k.dim(0);
  detail::require(k.dim(2) == C && b.rank() == 1 && b.dim(0) == C,
                  "depthwise_conv2d: channel mismatch x" + shape_str(x.shape()) +
                      " k" + shape_str(k.shape()) + " b" + shape_str(b.shape()));
  const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(K / 2);
  const auto Hs = static_cast<std::ptrdiff_t>(H), Ws = static_cast<std::ptrdiff_t>(W);

  std::vector<T> out(H * W * C);
  auto xv = x.values();
  auto kv = k.values();
  auto bv = b.values();
  for (std::ptrdiff_t h = 0; h < Hs; ++h) {
    for (std::ptrdiff_t w = 0; w < Ws; ++w) {
      T* o = &out[(h * Ws + w) * C];
      std::copy(bv.begin(), bv.end(), o);
      for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(K); ++u) {
        const std::ptrdiff_t hh = h + u - r;
        if (hh < 0 || hh >= Hs) continue;
        for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(K); ++v) {
          const std::ptrdiff_t ww = w + v - r;
          if (ww < 0 || ww >= Ws) continue;
          const T* xi = &xv[(hh * Ws + ww) * C];
          const T* ki = &kv[(u * K + v) * C];
          for (std::size_t c = 0; c < C; ++c) o[c] += xi[c] * ki[c];
        }
      }
    }
  }

  return Tensor<T>::from_op(
      x.shape(), std::move(out), {x, k, b}, [H, W, C, K, r](Node<T>& n) {
        const auto& xv = detail::input_value(n, 0);
        const auto& kv = detail::input_value(n, 1);
        auto* gx = detail::input_grad(n, 0);
        auto* gk = detail::input_grad(n, 1);
        auto* gb = detail::input_grad(n, 2);
        const auto Hs = static_cast<std::ptrdiff_t>(H);
        const auto Ws = static_cast<std::ptrdiff_t>(W);
        std::vector<double> kacc(gk ? K * K * C : 0, 0.0);
        std::vector<double> bacc(gb ? C : 0, 0.0);
        for (std::ptrdiff_t h = 0; h < Hs; ++h) {
          for (std::ptrdiff_t w = 0; w < Ws; ++w) {
            const T* g = &n.grad[(h * Ws + w) * C];
            if (gb) {
              for (std::size_t c = 0; c < C; ++c) bacc[c] += g[c];
            }
            for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(K); ++u) {
              const std::ptrdiff_t hh = h + u - r;
              if (hh < 0 || hh >= Hs) continue;
              for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(K); ++v) {
                const std::ptrdiff_t ww = w + v - r;
                if (ww < 0 || ww >= Ws) continue;
                const std::size_t xo = (hh * Ws + ww) * C;
                const std::size_t ko = (u * K + v) * C;
                if (gx) {
                  T* gxi = &(*gx)[xo];
                  const T* ki = &kv[ko];
                  for (std::size_t c = 0; c < C; ++c) gxi[c] += g[c] * ki[c];
                }
                if (gk) {
                  const T* xi = &xv[xo];
                  double* ka = &kacc[ko];
                  for (std::size_t c = 0; c < C; ++c) {
                    ka[c] += static_cast<double>(g[c]) * static_cast<double>(xi[c]);
                  }
                }
              }
            }
          }
        }
        if (gk) {
          for (std::size_t i = 0; i < kacc.size(); ++i) (*gk)[i] += static_cast<T>(kacc[i]);
        }
        if (gb) {
          for (std::size_t c = 0; c < C; ++c) (*gb)[c] += static_cast<T>(bacc[c]);
        }
      });
}

// Per-pixel affine channel map: out[..., o] = b[o] + sum_i w[o, i] x[..., i].
// Works on any rank >= 1 tensor whose last extent is Cin.
template <typename T>
Tensor<T> pointwise_linear(const Tensor<T>& x, const Tensor<T>& w,
                           const Tensor<T>& b) {
  detail::require(x.rank() >= 1 && w.rank() == 2 && b.rank() == 1,
                  "pointwise_linear: bad ranks");
  const std::size_t cin = x.shape().back();
  const std::size_t cout = w.dim(0);
  detail::require(w.dim(1) == cin && b.dim(0) == cout,
                  "pointwise_linear: x" + shape_str(x.shape()) + " w" +
                      shape_str(w.shape()) + " b" + shape_str(b.shape()));
  const std::size_t rows = x.numel() / cin;
  Shape out_shape = x.shape();
  out_shape.back() = cout;

  using Mat = detail::RowMatrix<T>;
  using CMap = Eigen::Map<const Mat>;
  using MMap = Eigen::Map<Mat>;
  std::vector<T> out(rows * cout);
  {
    CMap xm(x.values().data(), rows, cin);
    CMap wm(w.values().data(), cout, cin);
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bm(b.values().data(), cout);
    MMap om(out.data(), rows, cout);
    om.noalias() = xm * wm.transpose();
    om.rowwise() += bm;
  }

  return Tensor<T>::from_op(
      std::move(out_shape), std::move(out), {x, w, b},
      [rows, cin, cout](Node<T>& n) {
        CMap gout(n.grad.data(), rows, cout);
        if (auto* gx = detail::input_grad(n, 0)) {
          CMap wm(detail::input_value(n, 1).data(), cout, cin);
          MMap(gx->data(), rows, cin).noalias() += gout * wm;
        }
        if (auto* gw = detail::input_grad(n, 1)) {
          CMap xm(detail::input_value(n, 0).data(), rows, cin);
          MMap(gw->data(), cout, cin).noalias() += gout.transpose() * xm;
        }
        if (auto* gb = detail::input_grad(n, 2)) {
          std::vector<double> acc(cout, 0.0);
          for (std::size_t r = 0; r < rows; ++r) {
            const T* g = &n.grad[r * cout];
            for (std::size_t o = 0; o < cout; ++o) acc[o] += g[o];
          }
          for (std::size_t o = 0; o < cout; ++o) (*gb)[o] += static_cast<T>(acc[o]);
        }
      });
}

namespace detail {

// Source taps of a x2 half-pixel-center resize along one axis.
struct UpsampleTap {
  std::size_t lo, hi;
  double frac;  // weight of hi
};

inline std::vector<UpsampleTap> upsample2_taps(std::size_t n) {
  std::vector<UpsampleTap> taps(2 * n);
  for (std::size_t p = 0; p < 2 * n; ++p) {
    double src = (static_cast<double>(p) + 0.5) / 2.0 - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(n - 1));
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const std::size_t hi = std::min(lo + 1, n - 1);
    taps[p] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace detail

// x2 bilinear resize, half-pixel centers, clamped at the borders.
template <typename T>
Tensor<T> bilinear_upsample2(const Tensor<T>& x) {
  detail::require_hwc(x, "bilinear_upsample2");
  const std::size_t H = x.dim(0), W = x.dim(1), C = x.dim(2);
  detail::require(H >= 1 && W >= 1, "bilinear_upsample2: empty input");
  const auto ty = detail::upsample2_taps(H);
  const auto tx = detail::upsample2_taps(W);
  const std::size_t H2 = 2 * H, W2 = 2 * W;

  std::vector<T> out(H2 * W2 * C);
  auto xv = x.values();
  for (std::size_t p = 0; p < H2; ++p) {
    const T fy = static_cast<T>(ty[p].frac);
    for (std::size_t q = 0; q < W2; ++q) {
      const T fx = static_cast<T>(tx[q].frac);
      const T* a = &xv[(ty[p].lo * W + tx[q].lo) * C];
      const T* b = &xv[(ty[p].lo * W + tx[q].hi) * C];
      const T* c = &xv[(ty[p].hi * W + tx[q].lo) * C];
      const T* d = &xv[(ty[p].hi * W + tx[q].hi) * C];
      T* o = &out[(p * W2 + q) * C];
      // Lerp form keeps constants exact.
      for (std::size_t k = 0; k < C; ++k) {
        const T top = a[k] + fx * (b[k] - a[k]);
        const T bot = c[k] + fx * (d[k] - c[k]);
        o[k] = top + fy * (bot - top);
      }
    }
  }

  return Tensor<T>::from_op(
      Shape{H2, W2, C}, std::move(out), {x}, [H, W, C, ty, tx](Node<T>& n) {
        auto* gx = detail::input_grad(n, 0);
        if (!gx) return;
        const std::size_t W2 = 2 * W;
        for (std::size_t p = 0; p < 2 * H; ++p) {
          const T fy = static_cast<T>(ty[p].frac);
          for (std::size_t q = 0; q < W2; ++q) {
            const T fx = static_cast<T>(tx[q].frac);
            const T* g = &n.grad[(p * W2 + q) * C];
            T* a = &(*gx)[(ty[p].lo * W + tx[q].lo) * C];
            T* b = &(*gx)[(ty[p].lo * W + tx[q].hi) * C];
            T* c = &(*gx)[(ty[p].hi * W + tx[q].lo) * C];
            T* d = &(*gx)[(ty[p].hi * W + tx[q].hi) * C];
            const T wa = (T(1) - fy) * (T(1) - fx), wb = (T(1) - fy) * fx;
            const T wc = fy * (T(1) - fx), wd = fy * fx;
            for (std::size_t k = 0; k < C; ++k) {
              a[k] += wa * g[k];
              b[k] += wb * g[k];
              c[k] += wc * g[k];
              d[k] += wd * g[k];
            }
          }
        }
      });
}

// Normalizes each pixel over its channels, then applies gamma/beta.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma,
                     const Tensor<T>& beta, double eps = 1e-6) {
  detail::require(x.rank() >= 1, "layer_norm: scalar input");
  const std::size_t C = x.shape().back();
  detail::require(gamma.rank() == 1 && gamma.dim(0) == C && beta.rank() == 1 &&
                      beta.dim(0) == C,
                  "layer_norm: affine extents do not match channels");
  detail::require(eps > 0.0, "layer_norm: eps must be positive");
  const std::size_t rows = x.numel() / C;

  std::vector<T> out(x.numel());
  std::vector<T> xhat(x.numel());
  std::vector<T> inv_std(rows);
  auto xv = x.values();
  auto gv = gamma.values();
  auto bv = beta.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xi = &xv[r * C];
    double m = 0.0;
    for (std::size_t c = 0; c < C; ++c) m += xi[c];
    m /= static_cast<double>(C);
    double var = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double d = xi[c] - m;
      var += d * d;
    }
    var /= static_cast<double>(C);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = static_cast<T>(is);
    for (std::size_t c = 0; c < C; ++c) {
      const T xh = static_cast<T>((xi[c] - m) * is);
      xhat[r * C + c] = xh;
      out[r * C + c] = xh * gv[c] + bv[c];
    }
  }

  return Tensor<T>::from_op(
      x.shape(), std::move(out), {x, gamma, beta},
      [rows, C, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node<T>& n) {
        const auto& gv = detail::input_value(n, 1);
        auto* gx = detail::input_grad(n, 0);
        auto* gg = detail::input_grad(n, 1);
        auto* gb = detail::input_grad(n, 2);
        std::vector<double> gacc(gg ? C : 0, 0.0), bacc(gb ? C : 0, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
          const T* g = &n.grad[r * C];
          const T* xh = &xhat[r * C];
          if (gg || gb) {
            for (std::size_t c = 0; c < C; ++c) {
              if (gg) gacc[c] += static_cast<double>(g[c]) * xh[c];
              if (gb) bacc[c] += g[c];
            }
          }
          if (gx) {
            double mg = 0.0, mgx = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
              const double gy = static_cast<double>(g[c]) * gv[c];
              mg += gy;
              mgx += gy * xh[c];
            }
            mg /= static_cast<double>(C);
            mgx /= static_cast<double>(C);
            T* out = &(*gx)[r * C];
            for (std::size_t c = 0; c < C; ++c) {
              const double gy = static_cast<double>(g[c]) * gv[c];
              out[c] += static_cast<T>(inv_std[r] * (gy - mg - xh[c] * mgx));
            }
          }
        }
        if (gg) {
          for (std::size_t c = 0; c < C; ++c) (*gg)[c] += static_cast<T>(gacc[c]);
        }
        if (gb) {
          for (std::size_t c = 0; c < C; ++c) (*gb)[c] += static_cast<T>(bacc[c]);
        }
      });
}

// Sampled 1-D Gaussian of odd length K, normalized to unit sum.
inline std::vector<double> gaussian_kernel(double sigma, std::size_t K) {
  if (K % 2 == 0 || sigma <= 0.0) {
    throw ShapeError("gaussian_kernel: need odd K and sigma > 0");
  }
  const auto r = static_cast<std::ptrdiff_t>(K / 2);
  std::vector<double> g(K);
  double total = 0.0;
  for (std::ptrdiff_t i = -r; i <= r; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    g[i + r] = v;
    total += v;
  }
  for (double& v : g) v /= total;
  return g;
}

namespace detail {

// One separable pass along rows (axis 0) or columns (axis 1) with reflect
// padding. `transpose` scatters instead of gathers, giving the adjoint.
template <typename T>
void blur_axis(const T* in, T* out, std::size_t H, std::size_t W, std::size_t C,
               const std::vector<double>& g, int axis, bool transpose) {
  const auto r = static_cast<std::ptrdiff_t>(g.size() / 2);
  const auto n = static_cast<std::ptrdiff_t>(axis == 0 ? H : W);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t w = 0; w < W; ++w) {
      const auto pos = static_cast<std::ptrdiff_t>(axis == 0 ? h : w);
      const std::size_t o = (h * W + w) * C;
      for (std::ptrdiff_t t = -r; t <= r; ++t) {
        const std::ptrdiff_t s = reflect_index(pos + t, n);
        const std::size_t si = axis == 0 ? (static_cast<std::size_t>(s) * W + w) * C
                                         : (h * W + static_cast<std::size_t>(s)) * C;
        const T wt = static_cast<T>(g[t + r]);
        if (!transpose) {
          for (std::size_t c = 0; c < C; ++c) out[o + c] += wt * in[si + c];
        } else {
          for (std::size_t c = 0; c < C; ++c) out[si + c] += wt * in[o + c];
        }
      }
    }
  }
}

}  // namespace detail

// Separable Gaussian blur, reflect-padded, same output size.
template <typename T>
Tensor<T> gaussian_blur(const Tensor<T>& x, double sigma, std::size_t K) {
  detail::require_hwc(x, "gaussian_blur");
  const std::size_t H = x.dim(0), W = x.dim(1), C = x.dim(2);
  const auto g = gaussian_kernel(sigma, K);
  std::vector<T> tmp(x.numel(), T(0)), out(x.numel(), T(0));
  detail::blur_axis(x.values().data(), tmp.data(), H, W, C, g, 0, false);
  detail::blur_axis(tmp.data(), out.data(), H, W, C, g, 1, false);
  return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [H, W, C, g](Node<T>& n) {
    auto* gx = detail::input_grad(n, 0);
    if (!gx) return;
    std::vector<T> tmp(n.grad.size(), T(0));
    detail::blur_axis(n.grad.data(), tmp.data(), H, W, C, g, 1, true);
    detail::blur_axis(tmp.data(), gx->data(), H, W, C, g, 0, true);
  });
}

// (1 - w) * grid[lo] + w * grid[hi] over the leading axis.
template <typename T>
Tensor<T> lerp_slices(const Tensor<T>& grid, std::size_t lo, std::size_t hi, T w) {
  detail::require(grid.rank() >= 2 && lo < grid.dim(0) && hi < grid.dim(0),
                  "lerp_slices: slice index out of range");
  Shape slice_shape(grid.shape().begin() + 1, grid.shape().end());
  const std::size_t len = srnerv::numel(slice_shape);
  std::vector<T> out(len);
  auto gv = grid.values();
  const T* a = &gv[lo * len];
  const T* b = &gv[hi * len];
  for (std::size_t i = 0; i < len; ++i) out[i] = (T(1) - w) * a[i] + w * b[i];
  return Tensor<T>::from_op(
      std::move(slice_shape), std::move(out), {grid}, [lo, hi, len, w](Node<T>& n) {
        auto* g = detail::input_grad(n, 0);
        if (!g) return;
        for (std::size_t i = 0; i < len; ++i) {
          (*g)[lo * len + i] += (T(1) - w) * n.grad[i];
          (*g)[hi * len + i] += w * n.grad[i];
        }
      });
}

}  // namespace srnerv
