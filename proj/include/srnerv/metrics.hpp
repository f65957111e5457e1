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

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srnerv/errors.hpp"
#include "srnerv/media_io.hpp"
#include "srnerv/ops.hpp"
#include "srnerv/tensor.hpp"

namespace srnerv {

constexpr double kPsnrCap = 100.0;

inline double psnr_from_mse(double mse) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

template <typename A, typename B>
double mse(std::span<A> a, std::span<B> b) {
  if (a.size() != b.size() || a.empty()) throw ShapeError("mse: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

// Peak 1.0; identical inputs report the 100 dB cap.
inline double psnr(const VideoTensor& a, const VideoTensor& b) {
  if (a.frames != b.frames || a.height != b.height || a.width != b.width) {
    throw ShapeError("psnr: video dimensions differ");
  }
  return psnr_from_mse(mse(std::span<const float>(a.data), std::span<const float>(b.data)));
}

template <typename T>
double psnr(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same(a, b, "psnr");
  return psnr_from_mse(mse(a.values(), b.values()));
}

struct SsimParams {
  double sigma = 1.5;
  std::size_t window = 11;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Differentiable single-scale SSIM of two [H,W,C] images, averaged over
// pixels and channels. Local statistics come from reflect-padded Gaussian
// windows.
template <typename T>
Tensor<T> ssim_tensor(const Tensor<T>& a, const Tensor<T>& b, const SsimParams& p = {}) {
  detail::require_same(a, b, "ssim");
  detail::require_hwc(a, "ssim");
  if (a.dim(0) < p.window || a.dim(1) < p.window) {
    throw ShapeError("ssim: frame " + shape_str(a.shape()) + " smaller than the " +
                     std::to_string(p.window) + "px window");
  }
  const T c1 = static_cast<T>(p.k1 * p.k1);
  const T c2 = static_cast<T>(p.k2 * p.k2);
  auto blur = [&p](const Tensor<T>& x) { return gaussian_blur(x, p.sigma, p.window); };
  auto mu_a = blur(a);
  auto mu_b = blur(b);
  auto mu_aa = mul(mu_a, mu_a);
  auto mu_bb = mul(mu_b, mu_b);
  auto mu_ab = mul(mu_a, mu_b);
  auto var_a = sub(blur(mul(a, a)), mu_aa);
  auto var_b = sub(blur(mul(b, b)), mu_bb);
  auto cov = sub(blur(mul(a, b)), mu_ab);
  auto num = mul(add_scalar(scale(mu_ab, T(2)), c1), add_scalar(scale(cov, T(2)), c2));
  auto den = mul(add_scalar(add(mu_aa, mu_bb), c1), add_scalar(add(var_a, var_b), c2));
  return mean(div(num, den));
}

template <typename T>
double ssim(const Tensor<T>& a, const Tensor<T>& b, const SsimParams& p = {}) {
  return static_cast<double>(ssim_tensor(a, b, p).item());
}

// Mean per-frame SSIM, evaluated in double precision.
inline double ssim(const VideoTensor& a, const VideoTensor& b, const SsimParams& p = {}) {
  if (a.frames != b.frames || a.height != b.height || a.width != b.width) {
    throw ShapeError("ssim: video dimensions differ");
  }
  double acc = 0.0;
  for (int t = 0; t < a.frames; ++t) acc += ssim(a.frame<double>(t), b.frame<double>(t), p);
  return acc / a.frames;
}

inline double bpp(double total_bits, long long frames, long long height, long long width) {
  if (frames <= 0 || height <= 0 || width <= 0) throw ConfigError("bpp: dimensions must be positive");
  return total_bits / (static_cast<double>(frames) * static_cast<double>(height) *
                       static_cast<double>(width));
}

// ---------------------------------------------------------------------------
// Rate-distortion curves and Bjontegaard delta rate.

struct RDPoint {
  double bpp = 0.0;
  double psnr = 0.0;
  bool operator==(const RDPoint&) const = default;
};

// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
// derivatives with the usual three-point end conditions).
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw ConfigError("pchip: need >= 2 matching samples");
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!(x_[i + 1] > x_[i])) throw ConfigError("pchip: abscissae must strictly increase");
    }
    std::vector<double> h(n - 1), m(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      m[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    if (n == 2) {
      d_[0] = d_[1] = m[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (m[k - 1] * m[k] <= 0.0) continue;
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
    }
    d_[0] = end_slope(h[0], h[1], m[0], m[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  }

  double operator()(double x) const {
    const std::size_t k = segment(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * d_[k] +
           (-2 * t3 + 3 * t2) * y_[k + 1] + (t3 - t2) * h * d_[k + 1];
  }

  // Exact integral over [a, b] (a <= b, both inside the sample range).
  double integrate(double a, double b) const {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
      const double lo = std::max(a, x_[k]);
      const double hi = std::min(b, x_[k + 1]);
      if (hi <= lo) continue;
      const double h = x_[k + 1] - x_[k];
      auto antideriv = [&](double t) {
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
        return (t - t3 + t4 / 2) * y_[k] + (t2 / 2 - 2 * t3 / 3 + t4 / 4) * h * d_[k] +
               (t3 - t4 / 2) * y_[k + 1] + (-t3 / 3 + t4 / 4) * h * d_[k + 1];
      };
      total += h * (antideriv((hi - x_[k]) / h) - antideriv((lo - x_[k]) / h));
    }
    return total;
  }

  const std::vector<double>& slopes() const { return d_; }

 private:
  static double end_slope(double h0, double h1, double m0, double m1) {
    double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    auto sign = [](double v) { return (v > 0) - (v < 0); };
    if (sign(d) != sign(m0)) {
      d = 0.0;
    } else if (sign(m0) != sign(m1) && std::abs(d) > std::abs(3.0 * m0)) {
      d = 3.0 * m0;
    }
    return d;
  }

  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
  }

  std::vector<double> x_, y_, d_;
};

struct BdCurve {
  std::vector<double> psnr;      // strictly increasing
  std::vector<double> log_rate;  // log10(bpp)
};

inline BdCurve bd_curve(std::vector<RDPoint> pts, const char* which) {
  if (pts.size() < 4) {
    throw ConfigError(std::string("bd_rate: ") + which + " curve needs >= 4 points");
  }
  std::sort(pts.begin(), pts.end(), [](const RDPoint& a, const RDPoint& b) { return a.psnr < b.psnr; });
  BdCurve c;
  for (const auto& p : pts) {
    if (!(p.bpp > 0.0) || !std::isfinite(p.bpp) || !std::isfinite(p.psnr)) {
      throw ConfigError(std::string("bd_rate: ") + which + " curve has a non-positive or non-finite point");
    }
    if (!c.psnr.empty() && !(p.psnr > c.psnr.back())) {
      throw ConfigError(std::string("bd_rate: ") + which + " curve repeats a PSNR value");
    }
    c.psnr.push_back(p.psnr);
    c.log_rate.push_back(std::log10(p.bpp));
  }
  return c;
}

// Mean log10-rate difference (test minus anchor) over the shared PSNR range.
inline double bd_log_rate_delta(const std::vector<RDPoint>& anchor,
                                const std::vector<RDPoint>& test) {
  const auto a = bd_curve(anchor, "anchor");
  const auto t = bd_curve(test, "test");
  const double lo = std::max(a.psnr.front(), t.psnr.front());
  const double hi = std::min(a.psnr.back(), t.psnr.back());
  if (!(hi > lo)) throw ConfigError("bd_rate: curves have no PSNR overlap");
  const Pchip pa(a.psnr, a.log_rate), pt(t.psnr, t.log_rate);
  return (pt.integrate(lo, hi) - pa.integrate(lo, hi)) / (hi - lo);
}

// Average bitrate change of `test` against `anchor` in percent; negative
// means the test curve needs fewer bits for the same quality.
inline double bd_rate(const std::vector<RDPoint>& anchor, const std::vector<RDPoint>& test) {
  return (std::pow(10.0, bd_log_rate_delta(anchor, test)) - 1.0) * 100.0;
}

struct RDCurveFile {
  std::vector<RDPoint> points;
  std::vector<std::string> warnings;
};

inline void write_rd_csv(const std::vector<RDPoint>& pts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "bpp,psnr\n";
  char line[96];
  for (const auto& p : pts) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", p.bpp, p.psnr);
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

inline RDCurveFile parse_rd_csv(const std::string& text) {
  RDCurveFile f;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("rd csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "bpp,psnr") throw ConfigError("rd csv: header must be 'bpp,psnr'");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    RDPoint p;
    try {
      if (comma == std::string::npos) throw std::invalid_argument(line);
      std::size_t u1 = 0, u2 = 0;
      const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      p.bpp = std::stod(a, &u1);
      p.psnr = std::stod(b, &u2);
      if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw ConfigError("rd csv line " + std::to_string(lineno) + ": expected bpp,psnr");
    }
    if (!std::isfinite(p.bpp) || !std::isfinite(p.psnr) || p.bpp <= 0.0) {
      throw ConfigError("rd csv line " + std::to_string(lineno) + ": bpp must be positive and finite");
    }
    if (!f.points.empty()) {
      const auto& prev = f.points.back();
      if (p.bpp <= prev.bpp) {
        f.warnings.push_back("line " + std::to_string(lineno) + ": bpp not ascending");
      } else if (p.psnr <= prev.psnr) {
        f.warnings.push_back("line " + std::to_string(lineno) + ": psnr not increasing");
      }
    }
    f.points.push_back(p);
  }
  return f;
}

inline RDCurveFile read_rd_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rd_csv(ss.str());
}

}  // namespace srnerv
