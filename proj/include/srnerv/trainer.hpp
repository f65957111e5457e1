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

// Per-video fitting: L1 + SSIM loss, Adam with cosine annealing, global
// magnitude pruning and quantization-aware fine-tuning.
//
// The compression pipeline runs fit -> prune_global -> qat_finetune.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "srnerv/codec.hpp"
#include "srnerv/errors.hpp"
#include "srnerv/media_io.hpp"
#include "srnerv/metrics.hpp"
#include "srnerv/model.hpp"
#include "srnerv/ops.hpp"
#include "srnerv/rng.hpp"

namespace srnerv {

struct TrainConfig {
  int epochs = 200;  // passes over all frames
  double lr_max = 2e-3;
  double lr_min = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double ssim_weight = 0.3;  // lambda
  double prune_fraction = 0.15;
  int qat_bits = 6;
  double qat_epoch_fraction = 0.1;
  int batch = 1;  // frames per step
  std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& t) {
  auto fail = [](const std::string& what) { throw ConfigError("train config: " + what); };
  if (t.epochs < 0) fail("epochs must be >= 0");
  if (!(t.lr_max >= 0.0) || !(t.lr_min >= 0.0)) fail("learning rates must be >= 0");
  if (!(t.beta1 >= 0.0 && t.beta1 < 1.0) || !(t.beta2 >= 0.0 && t.beta2 < 1.0)) {
    fail("adam betas must be in [0,1)");
  }
  if (!(t.adam_eps > 0.0)) fail("adam_eps must be positive");
  if (!(t.ssim_weight >= 0.0)) fail("ssim_weight must be >= 0");
  if (!(t.prune_fraction >= 0.0 && t.prune_fraction < 1.0)) fail("prune_fraction must be in [0,1)");
  if (t.qat_bits < 2 || t.qat_bits > 8) fail("qat_bits must be in [2,8]");
  if (!(t.qat_epoch_fraction >= 0.0)) fail("qat_epoch_fraction must be >= 0");
  if (t.batch < 1) fail("batch must be >= 1");
}

inline bool apply_train_key(TrainConfig& t, const std::string& key, const std::string& value) {
  auto as_double = [&]() {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
    }
  };
  if (key == "epochs") t.epochs = parse_int_value(key, value);
  else if (key == "lr_max") t.lr_max = as_double();
  else if (key == "lr_min") t.lr_min = as_double();
  else if (key == "beta1") t.beta1 = as_double();
  else if (key == "beta2") t.beta2 = as_double();
  else if (key == "adam_eps") t.adam_eps = as_double();
  else if (key == "ssim_weight") t.ssim_weight = as_double();
  else if (key == "prune_fraction") t.prune_fraction = as_double();
  else if (key == "qat_bits") t.qat_bits = parse_int_value(key, value);
  else if (key == "qat_epoch_fraction") t.qat_epoch_fraction = as_double();
  else if (key == "batch") t.batch = parse_int_value(key, value);
  else if (key == "seed") {
    try {
      std::size_t used = 0;
      t.seed = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError("'seed' expects a non-negative integer, got '" + value + "'");
    }
  } else {
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Objective and schedule.

// mean|pred - target| + lambda * (1 - SSIM(pred, target)).
template <typename T>
Tensor<T> loss(const Tensor<T>& pred, const Tensor<T>& target, double ssim_weight) {
  detail::require_same(pred, target, "loss");
  auto l1 = mean(abs(sub(pred, target)));
  if (ssim_weight == 0.0) return l1;
  auto dssim = scale(add_scalar(ssim_tensor(pred, target), T(-1)), T(-1));
  return add(l1, scale(dssim, static_cast<T>(ssim_weight)));
}

inline double cosine_lr(long long step, long long total, double lr_max, double lr_min) {
  if (total <= 0) return lr_max;
  const double s = static_cast<double>(std::clamp(step, 0LL, total));
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * s / total));
}

// ---------------------------------------------------------------------------
// Adam.

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m, v;  // one pair per stored tensor
  long long step = 0;
};

template <typename T>
AdamState<T> make_adam_state(const ParameterStore<T>& st) {
  AdamState<T> s;
  for (const auto& p : st.named()) {
    s.m.emplace_back(p.tensor.numel(), T(0));
    s.v.emplace_back(p.tensor.numel(), T(0));
  }
  return s;
}

// Bias-corrected Adam on the tensors' accumulated gradients. Pruned entries
// are skipped and stay exactly zero.
template <typename T>
void adam_step(ParameterStore<T>& st, AdamState<T>& opt, double lr, const TrainConfig& cfg) {
  auto params = st.named();
  if (opt.m.size() != params.size()) throw ConfigError("optimizer state does not match store");
  ++opt.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (!p.tensor.has_grad()) continue;
    auto w = p.tensor.values();
    auto g = p.tensor.grad();
    auto& m = opt.m[k];
    auto& v = opt.v[k];
    if (m.size() != w.size()) throw ConfigError("optimizer state shape mismatch for " + p.name);
    auto mit = st.masks.find(p.name);
    const Mask* mask = mit == st.masks.end() ? nullptr : &mit->second;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (mask && (*mask)[i]) {
        w[i] = T(0);
        continue;
      }
      const double gi = static_cast<double>(g[i]);
      const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      w[i] = static_cast<T>(static_cast<double>(w[i]) - lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
    }
  }
}

// ---------------------------------------------------------------------------
// Fake quantization with a straight-through gradient.

template <typename T>
Tensor<T> fake_quantize(const Tensor<T>& w, const Mask* mask, int bits) {
  const auto q = quantize_tensor<T>(w.values(), mask, bits);
  std::vector<T> out(w.numel());
  dequantize_into<T>(q, std::span<T>(out));
  return Tensor<T>::from_op(w.shape(), std::move(out), {w}, [](Node<T>& n) {
    if (auto* g = detail::input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
    }
  });
}

// A store whose tensors are fake-quantized views of `st`. Aliasing of shared
// sets is preserved, so gradients still land in the one underlying tensor.
template <typename T>
ParameterStore<T> fake_quantized_view(const ParameterStore<T>& st, int bits) {
  auto fq = [&](const Tensor<T>& t, const std::string& name) {
    auto it = st.masks.find(name);
    return fake_quantize(t, it == st.masks.end() ? nullptr : &it->second, bits);
  };
  ParameterStore<T> out;
  out.config = st.config;
  out.masks = st.masks;
  out.grid = fq(st.grid, "grid");
  out.stem_w = fq(st.stem_w, "stem.weight");
  out.stem_b = fq(st.stem_b, "stem.bias");
  for (std::size_t k = 0; k < st.spatial.size(); ++k) {
    const std::string p = "sm." + std::to_string(k) + ".";
    const auto& s = st.spatial[k];
    out.spatial.push_back({fq(s.norm_gamma, p + "norm.gamma"), fq(s.norm_beta, p + "norm.beta"),
                           fq(s.kernel, p + "dw.weight"), fq(s.bias, p + "dw.bias")});
  }
  for (std::size_t k = 0; k < st.channel.size(); ++k) {
    const std::string p = "cm." + std::to_string(k) + ".";
    const auto& c = st.channel[k];
    out.channel.push_back({fq(c.norm_gamma, p + "norm.gamma"), fq(c.norm_beta, p + "norm.beta"),
                           fq(c.expand_w, p + "expand.weight"), fq(c.expand_b, p + "expand.bias"),
                           fq(c.contract_w, p + "contract.weight"),
                           fq(c.contract_b, p + "contract.bias")});
  }
  out.head_w = fq(st.head_w, "head.weight");
  out.head_b = fq(st.head_b, "head.bias");
  return out;
}

// ---------------------------------------------------------------------------
// Pruning.

// Masks the floor(fraction * N) smallest-magnitude prunable weights over the
// whole model; equal magnitudes go by ascending global flat index.
template <typename T>
void prune_global(ParameterStore<T>& st, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("prune fraction must be in [0,1)");
  auto params = st.named();
  struct Entry {
    double mag;
    std::size_t tensor, index;
  };
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].prunable) continue;
    auto it = st.masks.find(params[k].name);
    auto w = params[k].tensor.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      // Already pruned entries stay pruned and count towards the total.
      const bool pruned = it != st.masks.end() && it->second[i];
      entries.push_back({pruned ? -1.0 : std::abs(static_cast<double>(w[i])), k, i});
    }
  }
  const auto drop = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(entries.size())));
  if (drop == 0) return;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.mag < b.mag; });
  for (std::size_t e = 0; e < drop; ++e) {
    auto& p = params[entries[e].tensor];
    auto& mask = st.masks[p.name];
    if (mask.empty()) mask.assign(p.tensor.numel(), 0);
    mask[entries[e].index] = 1;
    p.tensor.values()[entries[e].index] = T(0);
  }
}

template <typename T>
std::size_t pruned_count(const ParameterStore<T>& st) {
  std::size_t n = 0;
  for (const auto& [name, mask] : st.masks) n += static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
  return n;
}

// ---------------------------------------------------------------------------
// Fitting loop.

struct LogRow {
  long long step;
  double lr;
  double loss;
  double psnr;
};

struct TrainLog {
  std::vector<LogRow> rows;

  std::string to_csv() const {
    std::ostringstream o;
    o << "step,lr,loss,psnr\n";
    char line[128];
    for (const auto& r : rows) {
      std::snprintf(line, sizeof line, "%lld,%.9g,%.9g,%.6f\n", r.step, r.lr, r.loss, r.psnr);
      o << line;
    }
    return o.str();
  }
};

inline void check_video_matches(const VideoTensor& video, const ModelConfig& c) {
  if (video.frames != c.frames || video.height != c.height || video.width != c.width) {
    throw ConfigError("video is " + std::to_string(video.frames) + "x" + std::to_string(video.height) +
                      "x" + std::to_string(video.width) + " but the model expects " +
                      std::to_string(c.frames) + "x" + std::to_string(c.height) + "x" +
                      std::to_string(c.width));
  }
}

inline long long steps_per_epoch(int frames, int batch) {
  return (frames + batch - 1) / batch;
}

namespace detail {

// One optimisation step on `frames`; `forward_store` is what generate()
// reads (the store itself or a fake-quantized view of it).
template <typename T, typename ViewFn>
LogRow train_step(ParameterStore<T>& st, AdamState<T>& opt, const VideoTensor& video,
                  const std::vector<int>& frames, double lr, const TrainConfig& tcfg,
                  long long step, ViewFn&& view) {
  st.zero_grad();
  const ParameterStore<T> fwd = view(st);
  Tensor<T> total;
  double sq_err = 0.0;
  std::size_t count = 0;
  for (int t : frames) {
    auto target = video.frame<T>(t);
    auto pred = generate(fwd, t);
    auto l = loss(pred, target, tcfg.ssim_weight);
    total = total.defined() ? add(total, l) : l;
    auto pv = pred.values();
    auto tv = target.values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double d = static_cast<double>(pv[i]) - static_cast<double>(tv[i]);
      sq_err += d * d;
    }
    count += pv.size();
  }
  total = scale(total, static_cast<T>(1.0 / static_cast<double>(frames.size())));
  const double loss_value = static_cast<double>(total.item());
  if (!std::isfinite(loss_value)) {
    throw TrainingDivergence("loss became " + std::to_string(loss_value) + " at step " +
                             std::to_string(step) + " (lr " + std::to_string(lr) + ")");
  }
  backward(total);
  adam_step(st, opt, lr, tcfg);
  return {step, lr, loss_value, psnr_from_mse(sq_err / static_cast<double>(count))};
}

// Frame order for one epoch: a seeded permutation, chunked into batches.
inline std::vector<std::vector<int>> epoch_batches(int frames, int batch, std::uint64_t seed,
                                                   long long epoch) {
  Rng rng(mix_seed(seed, 0x10000 + static_cast<std::uint64_t>(epoch)));
  const auto perm = rng.permutation(static_cast<std::size_t>(frames));
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < perm.size(); i += static_cast<std::size_t>(batch)) {
    std::vector<int> b;
    for (std::size_t j = i; j < std::min(perm.size(), i + batch); ++j) b.push_back(static_cast<int>(perm[j]));
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace detail

template <typename T>
struct FitResult {
  ParameterStore<T> store;
  TrainLog log;
};

// Fits a freshly initialized model to `video`.
template <typename T = float>
FitResult<T> fit(const VideoTensor& video, const ModelConfig& mcfg, const TrainConfig& tcfg) {
  validate(tcfg);
  check_video_matches(video, mcfg);
  FitResult<T> res{build_model<T>(mcfg, tcfg.seed), {}};
  auto opt = make_adam_state(res.store);
  const long long per_epoch = steps_per_epoch(mcfg.frames, tcfg.batch);
  const long long total = per_epoch * tcfg.epochs;
  long long step = 0;
  for (long long e = 0; e < tcfg.epochs; ++e) {
    for (const auto& frames : detail::epoch_batches(mcfg.frames, tcfg.batch, tcfg.seed, e)) {
      const double lr = cosine_lr(step, total, tcfg.lr_max, tcfg.lr_min);
      res.log.rows.push_back(detail::train_step(res.store, opt, video, frames, lr, tcfg, step,
                                                [](const ParameterStore<T>& s) { return s; }));
      ++step;
    }
  }
  res.store.zero_grad();
  return res;
}

inline long long qat_steps(const TrainConfig& tcfg, int frames) {
  const long long epochs = static_cast<long long>(std::ceil(tcfg.qat_epoch_fraction * tcfg.epochs));
  return epochs * steps_per_epoch(frames, tcfg.batch);
}

// Continues fitting with fake-quantized weights in the forward pass and
// straight-through gradients, at a constant lr_max / 10.
template <typename T>
TrainLog qat_finetune(ParameterStore<T>& st, const VideoTensor& video, const TrainConfig& tcfg,
                      std::optional<long long> steps = std::nullopt) {
  validate(tcfg);
  check_video_matches(video, st.config);
  const long long n = steps.value_or(qat_steps(tcfg, st.config.frames));
  auto opt = make_adam_state(st);
  TrainLog log;
  const double lr = tcfg.lr_max / 10.0;
  long long step = 0;
  for (long long e = 0; step < n; ++e) {
    for (const auto& frames :
         detail::epoch_batches(st.config.frames, tcfg.batch, mix_seed(tcfg.seed, 0x9a7), e)) {
      if (step >= n) break;
      log.rows.push_back(detail::train_step(
          st, opt, video, frames, lr, tcfg, step,
          [&tcfg](const ParameterStore<T>& s) { return fake_quantized_view(s, tcfg.qat_bits); }));
      ++step;
    }
  }
  st.zero_grad();
  return log;
}

}  // namespace srnerv
