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


// Independent reference implementations used by the tests. Nothing here
// calls into the code under test except to build inputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "srnerv/srnerv.hpp"

namespace oracle {

using srnerv::Shape;
using srnerv::Tensor;

template <typename T>
Tensor<T> random_tensor(srnerv::Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0,
                        bool requires_grad = true) {
  std::vector<T> v(srnerv::numel(shape));
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return Tensor<T>(std::move(shape), std::move(v), requires_grad);
}

// Values bounded away from zero, for ops with a kink or pole there.
template <typename T>
Tensor<T> random_nonzero(srnerv::Rng& rng, Shape shape, double lo, double hi) {
  auto t = random_tensor<T>(rng, std::move(shape), lo, hi);
  for (auto& x : t.values()) x = rng.uniform() < 0.5 ? -x : x;
  return t;
}

// ---------------------------------------------------------------------------
// Loop oracles for the forward ops (double precision, [H,W,C] row-major).

inline double at3(const std::vector<double>& v, std::size_t W, std::size_t C, std::size_t h,
                  std::size_t w, std::size_t c) {
  return v[(h * W + w) * C + c];
}

inline std::vector<double> conv_ref(const std::vector<double>& x, const std::vector<double>& k,
                                    const std::vector<double>& b, int H, int W, int C, int K) {
  std::vector<double> out(static_cast<std::size_t>(H * W * C));
  for (int h = 0; h < H; ++h)
    for (int w = 0; w < W; ++w)
      for (int c = 0; c < C; ++c) {
        double s = b[c];
        for (int u = 0; u < K; ++u)
          for (int v = 0; v < K; ++v) {
            const int y = h + u - K / 2, z = w + v - K / 2;
            if (y < 0 || y >= H || z < 0 || z >= W) continue;
            s += x[(y * W + z) * C + c] * k[(u * K + v) * C + c];
          }
        out[(h * W + w) * C + c] = s;
      }
  return out;
}

inline std::vector<double> linear_ref(const std::vector<double>& x, const std::vector<double>& w,
                                      const std::vector<double>& b, std::size_t rows,
                                      std::size_t cin, std::size_t cout) {
  std::vector<double> out(rows * cout);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t o = 0; o < cout; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < cin; ++i) s += w[o * cin + i] * x[r * cin + i];
      out[r * cout + o] = s;
    }
  return out;
}

// Samples the source at continuous coordinate (p + 0.5) / 2 - 0.5, clamped.
inline std::vector<double> upsample_ref(const std::vector<double>& x, int H, int W, int C) {
  auto sample = [](int p, int n, int& lo, int& hi, double& f) {
    double s = (p + 0.5) / 2.0 - 0.5;
    s = std::min(std::max(s, 0.0), static_cast<double>(n - 1));
    lo = static_cast<int>(std::floor(s));
    hi = std::min(lo + 1, n - 1);
    f = s - lo;
  };
  std::vector<double> out(static_cast<std::size_t>(4 * H * W * C));
  for (int p = 0; p < 2 * H; ++p)
    for (int q = 0; q < 2 * W; ++q) {
      int y0, y1, x0, x1;
      double fy, fx;
      sample(p, H, y0, y1, fy);
      sample(q, W, x0, x1, fx);
      for (int c = 0; c < C; ++c) {
        const double v = (1 - fy) * (1 - fx) * x[(y0 * W + x0) * C + c] +
                         (1 - fy) * fx * x[(y0 * W + x1) * C + c] +
                         fy * (1 - fx) * x[(y1 * W + x0) * C + c] +
                         fy * fx * x[(y1 * W + x1) * C + c];
        out[(p * 2 * W + q) * C + c] = v;
      }
    }
  return out;
}

inline std::vector<double> layer_norm_ref(const std::vector<double>& x,
                                          const std::vector<double>& g,
                                          const std::vector<double>& b, std::size_t C,
                                          double eps) {
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < x.size() / C; ++r) {
    double mu = 0, var = 0;
    for (std::size_t c = 0; c < C; ++c) mu += x[r * C + c];
    mu /= C;
    for (std::size_t c = 0; c < C; ++c) var += (x[r * C + c] - mu) * (x[r * C + c] - mu);
    var /= C;
    for (std::size_t c = 0; c < C; ++c) {
      out[r * C + c] = (x[r * C + c] - mu) / std::sqrt(var + eps) * g[c] + b[c];
    }
  }
  return out;
}

inline double gelu_ref(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

// Direct 2-D Gaussian window with numpy "reflect" padding.
inline std::vector<double> blur_ref(const std::vector<double>& x, int H, int W, int C,
                                    double sigma, int K) {
  auto reflect = [](int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
  };
  std::vector<double> g(static_cast<std::size_t>(K));
  double tot = 0;
  for (int i = 0; i < K; ++i) {
    const double d = i - K / 2;
    g[i] = std::exp(-d * d / (2 * sigma * sigma));
    tot += g[i];
  }
  for (auto& v : g) v /= tot;
  std::vector<double> out(x.size(), 0.0);
  for (int h = 0; h < H; ++h)
    for (int w = 0; w < W; ++w)
      for (int c = 0; c < C; ++c) {
        double s = 0;
        for (int u = 0; u < K; ++u)
          for (int v = 0; v < K; ++v) {
            s += g[u] * g[v] * x[(reflect(h + u - K / 2, H) * W + reflect(w + v - K / 2, W)) * C + c];
          }
        out[(h * W + w) * C + c] = s;
      }
  return out;
}

// Scalar SSIM of two constant images: only the luminance term survives.
inline double ssim_constant(double m1, double m2, double k1 = 0.01) {
  const double c1 = k1 * k1;
  return (2 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1);
}

template <typename T>
std::vector<double> as_double(const Tensor<T>& t) {
  auto v = t.values();
  return {v.begin(), v.end()};
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? m : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Central finite differences.

template <typename T>
struct GradCase {
  std::string name;
  std::vector<Tensor<T>> inputs;
  std::function<Tensor<T>(const std::vector<Tensor<T>>&)> loss;
};

// max |analytic - numeric| / max(max |numeric|, 1e-3), over every input.
template <typename T>
double grad_rel_error(GradCase<T>& gc, double step) {
  for (auto& t : gc.inputs) t.zero_grad();
  auto l = gc.loss(gc.inputs);
  srnerv::backward(l);
  double worst = 0.0;
  for (auto& in : gc.inputs) {
    if (!in.requires_grad()) continue;
    std::vector<double> analytic(in.numel(), 0.0), numeric(in.numel());
    if (in.has_grad()) {
      auto g = in.grad();
      analytic.assign(g.begin(), g.end());
    }
    srnerv::NoGradGuard ng;
    auto v = in.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const T orig = v[i];
      v[i] = static_cast<T>(orig + step);
      const double up = static_cast<double>(gc.loss(gc.inputs).item());
      v[i] = static_cast<T>(orig - step);
      const double down = static_cast<double>(gc.loss(gc.inputs).item());
      v[i] = orig;
      numeric[i] = (up - down) / (2.0 * step);
    }
    double num_scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      num_scale = std::max(num_scale, std::abs(numeric[i]));
      err = std::max(err, std::abs(analytic[i] - numeric[i]));
    }
    worst = std::max(worst, err / std::max(num_scale, 1e-3));
  }
  return worst;
}

// Single-precision check: analytic float gradients against central
// differences of the same instance evaluated in double. Both cases must come
// from grad_cases with one seed; the double inputs are overwritten with the
// float values so the two evaluate the identical point.
inline double grad_rel_error_f32(GradCase<float>& f, GradCase<double>& d, double step) {
  for (std::size_t k = 0; k < f.inputs.size(); ++k) {
    auto fv = f.inputs[k].values();
    auto dv = d.inputs[k].values();
    for (std::size_t i = 0; i < fv.size(); ++i) dv[i] = static_cast<double>(fv[i]);
    f.inputs[k].zero_grad();
  }
  auto l = f.loss(f.inputs);
  srnerv::backward(l);
  srnerv::NoGradGuard ng;
  double worst = 0.0;
  for (std::size_t k = 0; k < f.inputs.size(); ++k) {
    auto& in = f.inputs[k];
    if (!in.requires_grad()) continue;
    auto dv = d.inputs[k].values();
    double num_scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < dv.size(); ++i) {
      const double orig = dv[i];
      dv[i] = orig + step;
      const double up = d.loss(d.inputs).item();
      dv[i] = orig - step;
      const double down = d.loss(d.inputs).item();
      dv[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = in.has_grad() ? static_cast<double>(in.grad()[i]) : 0.0;
      num_scale = std::max(num_scale, std::abs(numeric));
      err = std::max(err, std::abs(analytic - numeric));
    }
    worst = std::max(worst, err / std::max(num_scale, 1e-3));
  }
  return worst;
}

// sum(out * R) for a fixed random R, so every output element has its own
// upstream weight.
template <typename T>
Tensor<T> project(const Tensor<T>& out, std::uint64_t seed) {
  srnerv::Rng rng(seed);
  auto r = random_tensor<T>(rng, out.shape(), -1.0, 1.0, false);
  return srnerv::sum(srnerv::mul(out, r));
}

// One random instance of every differentiable op plus the full generator.
template <typename T>
std::vector<GradCase<T>> grad_cases(std::uint64_t seed) {
  using namespace srnerv;
  Rng rng(seed);
  auto dim = [&](int lo, int hi) { return static_cast<std::size_t>(lo + rng.below(static_cast<std::uint64_t>(hi - lo + 1))); };
  const std::size_t H = dim(2, 8), W = dim(2, 8), C = dim(1, 4);
  const Shape hwc{H, W, C};
  const std::uint64_t ps = seed * 7919 + 1;
  std::vector<GradCase<T>> cases;
  auto add_case = [&](std::string name, std::vector<Tensor<T>> in,
                      std::function<Tensor<T>(const std::vector<Tensor<T>>&)> f) {
    cases.push_back({std::move(name), std::move(in),
                     [f, ps](const std::vector<Tensor<T>>& x) { return project(f(x), ps); }});
  };
  using V = std::vector<Tensor<T>>;
  add_case("add", {random_tensor<T>(rng, hwc), random_tensor<T>(rng, hwc)},
           [](const V& x) { return srnerv::add(x[0], x[1]); });
  add_case("sub", {random_tensor<T>(rng, hwc), random_tensor<T>(rng, hwc)},
           [](const V& x) { return srnerv::sub(x[0], x[1]); });
  add_case("mul", {random_tensor<T>(rng, hwc), random_tensor<T>(rng, hwc)},
           [](const V& x) { return srnerv::mul(x[0], x[1]); });
  add_case("div", {random_tensor<T>(rng, hwc), random_nonzero<T>(rng, hwc, 0.5, 2.0)},
           [](const V& x) { return srnerv::div(x[0], x[1]); });
  add_case("scale", {random_tensor<T>(rng, hwc)},
           [](const V& x) { return srnerv::scale(x[0], T(-1.7)); });
  add_case("add_scalar", {random_tensor<T>(rng, hwc)},
           [](const V& x) { return srnerv::add_scalar(x[0], T(0.3)); });
  add_case("square", {random_tensor<T>(rng, hwc)}, [](const V& x) { return srnerv::square(x[0]); });
  add_case("abs", {random_nonzero<T>(rng, hwc, 0.1, 1.0)}, [](const V& x) { return srnerv::abs(x[0]); });
  add_case("sigmoid", {random_tensor<T>(rng, hwc, -3, 3)}, [](const V& x) { return srnerv::sigmoid(x[0]); });
  add_case("gelu", {random_tensor<T>(rng, hwc, -3, 3)}, [](const V& x) { return srnerv::gelu(x[0]); });
  add_case("sum", {random_tensor<T>(rng, hwc)}, [](const V& x) { return srnerv::scale(srnerv::sum(x[0]), T(1)); });
  add_case("mean", {random_tensor<T>(rng, hwc)}, [](const V& x) { return srnerv::mean(x[0]); });
  const std::size_t K = rng.uniform() < 0.5 ? 1 : 3;
  add_case("depthwise_conv2d",
           {random_tensor<T>(rng, hwc), random_tensor<T>(rng, {K, K, C}), random_tensor<T>(rng, {C})},
           [](const V& x) { return depthwise_conv2d(x[0], x[1], x[2]); });
  const std::size_t cout = dim(1, 5);
  add_case("pointwise_linear",
           {random_tensor<T>(rng, hwc), random_tensor<T>(rng, {cout, C}), random_tensor<T>(rng, {cout})},
           [](const V& x) { return pointwise_linear(x[0], x[1], x[2]); });
  add_case("bilinear_upsample2", {random_tensor<T>(rng, hwc)},
           [](const V& x) { return bilinear_upsample2(x[0]); });
  const std::size_t cn = dim(2, 4);
  add_case("layer_norm",
           {random_tensor<T>(rng, {H, W, cn}), random_tensor<T>(rng, {cn}, 0.5, 1.5),
            random_tensor<T>(rng, {cn})},
           [](const V& x) { return layer_norm(x[0], x[1], x[2]); });
  add_case("gaussian_blur", {random_tensor<T>(rng, hwc)},
           [](const V& x) { return gaussian_blur(x[0], 1.5, 5); });
  const std::size_t gt = dim(2, 4);
  const std::size_t lo = static_cast<std::size_t>(rng.below(gt));
  const std::size_t hi = static_cast<std::size_t>(rng.below(gt));
  const T w = static_cast<T>(rng.uniform());
  add_case("lerp_slices", {random_tensor<T>(rng, {gt, H, W, C})},
           [lo, hi, w](const V& x) { return lerp_slices(x[0], lo, hi, w); });

  // SSIM-based loss on images large enough for a small window.
  const Shape img{dim(11, 13), dim(11, 13), 3};
  cases.push_back({"loss",
                   {random_tensor<T>(rng, img, 0.05, 0.95), random_tensor<T>(rng, img, 0.05, 0.95, false)},
                   [](const V& x) { return loss(x[0], x[1], 0.3); }});

  // Whole generator, hybrid sharing, every stored tensor as an input.
  ModelConfig mc;
  mc.stages = 2;
  mc.blocks = 1 + static_cast<int>(rng.below(2));
  mc.channels = 3;
  mc.ffn_ratio = 2;
  mc.grid_t = 2;
  mc.grid_h = 1;
  mc.grid_w = 2;
  mc.grid_c = 2;
  mc.frames = 3;
  mc.height = 4;
  mc.width = 8;
  mc.share = static_cast<ShareMode>(rng.below(3));
  auto st = build_model<T>(mc, seed);
  // Randomize everything so no branch sits at its zero init.
  for (auto& p : st.named()) {
    for (auto& v : p.tensor.values()) v = static_cast<T>(rng.uniform(-0.8, 0.8));
  }
  const int frame = static_cast<int>(rng.below(static_cast<std::uint64_t>(mc.frames)));
  V params;
  for (auto& p : st.named()) params.push_back(p.tensor);
  cases.push_back({"generate", params, [st, frame, ps](const V&) { return project(generate(st, frame), ps); }});
  return cases;
}

// ---------------------------------------------------------------------------
// Scalar Adam.

struct ScalarAdam {
  double m = 0, v = 0;
  long long t = 0;
  double step(double w, double g, double lr, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, static_cast<double>(t)));
    const double vh = v / (1 - std::pow(b2, static_cast<double>(t)));
    return w - lr * mh / (std::sqrt(vh) + eps);
  }
};

// ---------------------------------------------------------------------------
// Bjontegaard reference: Fritsch-Carlson monotone cubic Hermite (the scipy
// PCHIP end rules) sampled on a fine grid and integrated with the trapezoid
// rule.

class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      del[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (del[i - 1] * del[i] <= 0) continue;
      const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
    auto edge = [](double h0, double h1, double m0, double m1) {
      double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
      if ((d > 0) != (m0 > 0) || d == 0) return 0.0;
      if ((m0 > 0) != (m1 > 0) && std::abs(d) > std::abs(3 * m0)) return 3 * m0;
      return d;
    };
    if (n == 2) {
      d_[0] = d_[1] = del[0];
    } else {
      d_[0] = edge(h[0], h[1], del[0], del[1]);
      d_[n - 1] = edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }
  }

  double operator()(double xq) const {
    std::size_t k = 0;
    while (k + 2 < x_.size() && xq > x_[k + 1]) ++k;
    const double h = x_[k + 1] - x_[k], t = (xq - x_[k]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
  }

 private:
  std::vector<double> x_, y_, d_;
};

inline double bd_rate_reference(std::vector<srnerv::RDPoint> anchor, std::vector<srnerv::RDPoint> test,
                                int samples = 200000) {
  auto curve = [](std::vector<srnerv::RDPoint> p) {
    std::sort(p.begin(), p.end(), [](auto& a, auto& b) { return a.psnr < b.psnr; });
    std::vector<double> x, y;
    for (auto& q : p) {
      x.push_back(q.psnr);
      y.push_back(std::log10(q.bpp));
    }
    return std::make_pair(x, y);
  };
  auto [xa, ya] = curve(anchor);
  auto [xt, yt] = curve(test);
  const double lo = std::max(xa.front(), xt.front()), hi = std::min(xa.back(), xt.back());
  MonotoneCubic fa(xa, ya), ft(xt, yt);
  double acc = 0;
  const double dx = (hi - lo) / samples;
  for (int i = 0; i <= samples; ++i) {
    const double x = lo + i * dx;
    const double wgt = (i == 0 || i == samples) ? 0.5 : 1.0;
    acc += wgt * (ft(x) - fa(x));
  }
  const double mean_delta = acc * dx / (hi - lo);
  return (std::pow(10.0, mean_delta) - 1.0) * 100.0;
}

// ---------------------------------------------------------------------------
// Entropy.

inline double shannon_bits(const std::vector<std::int8_t>& symbols, const std::vector<double>& p,
                           int offset) {
  double bits = 0;
  for (auto s : symbols) bits -= std::log2(p[static_cast<std::size_t>(s + offset)]);
  return bits;
}

// ---------------------------------------------------------------------------
// Tied-weight expansion: the none-mode store computing exactly what a
// hybrid or full store computes.

template <typename T>
srnerv::ParameterStore<T> untie(const srnerv::ParameterStore<T>& src) {
  auto cfg = src.config;
  cfg.share = srnerv::ShareMode::kNone;
  auto dst = srnerv::allocate_store<T>(cfg);
  auto copy = [](const Tensor<T>& from, Tensor<T>& to) {
    std::copy(from.values().begin(), from.values().end(), to.values().begin());
  };
  copy(src.grid, dst.grid);
  copy(src.stem_w, dst.stem_w);
  copy(src.stem_b, dst.stem_b);
  copy(src.head_w, dst.head_w);
  copy(src.head_b, dst.head_b);
  for (int i = 0; i < cfg.stages; ++i) {
    for (int j = 0; j < cfg.blocks; ++j) {
      const auto& s = src.spatial_at(i, j);
      auto& ds = dst.spatial[static_cast<std::size_t>(i * cfg.blocks + j)];
      copy(s.norm_gamma, ds.norm_gamma);
      copy(s.norm_beta, ds.norm_beta);
      copy(s.kernel, ds.kernel);
      copy(s.bias, ds.bias);
      const auto& c = src.channel_at(i, j);
      auto& dc = dst.channel[static_cast<std::size_t>(i * cfg.blocks + j)];
      copy(c.norm_gamma, dc.norm_gamma);
      copy(c.norm_beta, dc.norm_beta);
      copy(c.expand_w, dc.expand_w);
      copy(c.expand_b, dc.expand_b);
      copy(c.contract_w, dc.contract_w);
      copy(c.contract_b, dc.contract_b);
    }
  }
  return dst;
}

// Randomizes every tensor of a store (so no block sits at its init).
template <typename T>
void randomize(srnerv::ParameterStore<T>& st, std::uint64_t seed, double amp = 0.5) {
  srnerv::Rng rng(seed);
  for (auto& p : st.named()) {
    for (auto& v : p.tensor.values()) v = static_cast<T>(rng.uniform(-amp, amp));
  }
}

}  // namespace oracle
