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

// Scale-wise recursive generator.
//
// A learnable feature grid is sliced (and temporally interpolated) for frame
// t, lifted to C channels, then taken through M x2 upsampling stages of L
// residual blocks each:
//
//   y = dwconv(norm(h)) + h                 spatial mixing,  per stage
//   z = contract(gelu(expand(norm(y)))) + y channel mixing, per position
//
// Which parameter sets the (stage, position) pairs read is the share mode:
//
//   kNone    spatial (i,j)  channel (i,j)   independent blocks
//   kFull    spatial (j)    channel (j)     whole block reused over stages
//   kHybrid  spatial (i,j)  channel (j)     channel mixing reused only
//
// Reuse is by reference: a shared set is one tensor, so gradients from every
// stage accumulate into it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "srnerv/errors.hpp"
#include "srnerv/ops.hpp"
#include "srnerv/rng.hpp"
#include "srnerv/tensor.hpp"

namespace srnerv {

enum class ShareMode : std::uint8_t { kNone = 0, kFull = 1, kHybrid = 2 };

inline const char* to_string(ShareMode mode) {
  switch (mode) {
    case ShareMode::kNone: return "none";
    case ShareMode::kFull: return "full";
    case ShareMode::kHybrid: return "hybrid";
  }
  return "?";
}

inline ShareMode parse_share_mode(const std::string& s) {
  if (s == "none") return ShareMode::kNone;
  if (s == "full") return ShareMode::kFull;
  if (s == "hybrid") return ShareMode::kHybrid;
  throw ConfigError("unknown share mode '" + s + "' (none|full|hybrid)");
}

struct ModelConfig {
  int stages = 3;          // M
  int blocks = 2;          // L, per stage
  int channels = 16;       // C, constant over stages
  int kernel = 3;          // depthwise K
  int ffn_ratio = 4;       // r
  int grid_t = 8;
  int grid_h = 8;
  int grid_w = 8;
  int grid_c = 8;
  ShareMode share = ShareMode::kHybrid;
  int frames = 8;          // T
  int height = 64;         // H = grid_h * 2^M
  int width = 64;          // W = grid_w * 2^M

  int spatial_sets() const {
    return share == ShareMode::kFull ? blocks : stages * blocks;
  }
  int channel_sets() const {
    return share == ShareMode::kNone ? stages * blocks : blocks;
  }
  int spatial_index(int stage, int pos) const {
    return share == ShareMode::kFull ? pos : stage * blocks + pos;
  }
  int channel_index(int stage, int pos) const {
    return share == ShareMode::kNone ? stage * blocks + pos : pos;
  }

  bool operator==(const ModelConfig&) const = default;
};

// Throws ConfigError describing the first violated constraint.
inline void validate(const ModelConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError("model config: " + what); };
  if (c.stages < 1 || c.stages > 12) fail("stages must be in [1,12]");
  if (c.blocks < 1) fail("blocks must be >= 1");
  if (c.channels < 1) fail("channels must be >= 1");
  if (c.kernel < 1 || c.kernel % 2 == 0) fail("kernel must be odd and >= 1");
  if (c.ffn_ratio < 1) fail("ffn_ratio must be >= 1");
  if (c.grid_t < 1 || c.grid_h < 1 || c.grid_w < 1 || c.grid_c < 1) {
    fail("grid extents must be >= 1");
  }
  if (c.frames < 1 || c.frames > 100000) fail("frames must be in [1,100000]");
  if (c.height < 1 || c.height > 65536 || c.width < 1 || c.width > 65536) {
    fail("height and width must be in [1,65536]");
  }
  if (c.grid_t > c.frames) fail("grid_t must not exceed frames");
  if (static_cast<long long>(c.grid_h) << c.stages != c.height ||
      static_cast<long long>(c.grid_w) << c.stages != c.width) {
    fail("output " + std::to_string(c.height) + "x" + std::to_string(c.width) +
         " is not grid " + std::to_string(c.grid_h) + "x" + std::to_string(c.grid_w) +
         " upsampled x2^" + std::to_string(c.stages));
  }
}

// ---------------------------------------------------------------------------
// Key=value text form.

inline std::string to_text(const ModelConfig& c) {
  std::ostringstream o;
  o << "stages=" << c.stages << '\n'
    << "blocks=" << c.blocks << '\n'
    << "channels=" << c.channels << '\n'
    << "kernel=" << c.kernel << '\n'
    << "ffn_ratio=" << c.ffn_ratio << '\n'
    << "grid_t=" << c.grid_t << '\n'
    << "grid_h=" << c.grid_h << '\n'
    << "grid_w=" << c.grid_w << '\n'
    << "grid_c=" << c.grid_c << '\n'
    << "share_mode=" << to_string(c.share) << '\n'
    << "frames=" << c.frames << '\n'
    << "height=" << c.height << '\n'
    << "width=" << c.width << '\n';
  return o.str();
}

inline int parse_int_value(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size() || v < std::numeric_limits<int>::min() ||
        v > std::numeric_limits<int>::max()) {
      throw std::invalid_argument(value);
    }
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
  }
}

// Applies one key; returns false when the key is not a model key.
inline bool apply_model_key(ModelConfig& c, const std::string& key,
                            const std::string& value) {
  static const std::map<std::string, int ModelConfig::*> ints = {
      {"stages", &ModelConfig::stages},     {"blocks", &ModelConfig::blocks},
      {"channels", &ModelConfig::channels}, {"kernel", &ModelConfig::kernel},
      {"ffn_ratio", &ModelConfig::ffn_ratio}, {"grid_t", &ModelConfig::grid_t},
      {"grid_h", &ModelConfig::grid_h},     {"grid_w", &ModelConfig::grid_w},
      {"grid_c", &ModelConfig::grid_c},     {"frames", &ModelConfig::frames},
      {"height", &ModelConfig::height},     {"width", &ModelConfig::width},
  };
  if (key == "share_mode") {
    c.share = parse_share_mode(value);
    return true;
  }
  auto it = ints.find(key);
  if (it == ints.end()) return false;
  c.*(it->second) = parse_int_value(key, value);
  return true;
}

// Splits "key=value" lines; '#' starts a comment. Throws on malformed lines.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline ModelConfig model_config_from_text(const std::string& text,
                                          ModelConfig base = {}) {
  for (const auto& [k, v] : parse_key_values(text)) {
    if (!apply_model_key(base, k, v)) throw ConfigError("unknown model key '" + k + "'");
  }
  return base;
}

// ---------------------------------------------------------------------------
// Parameters.

template <typename T>
struct SpatialMixing {
  Tensor<T> norm_gamma, norm_beta;  // [C]
  Tensor<T> kernel;                 // [K,K,C]
  Tensor<T> bias;                   // [C]
};

template <typename T>
struct ChannelMixing {
  Tensor<T> norm_gamma, norm_beta;  // [C]
  Tensor<T> expand_w, expand_b;     // [rC,C], [rC]
  Tensor<T> contract_w, contract_b; // [C,rC], [C]
};

enum class Partition : std::uint8_t { kSpatial, kChannel, kOther };

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
  Partition partition;
  bool prunable;  // mixing weight matrices/kernels only
};

// Binary keep/drop flags; 1 = pruned (value forced to zero).
using Mask = std::vector<std::uint8_t>;

// Name, extents and role of every stored tensor, in canonical order,
// derived from the config alone (no allocation).
struct ParamSpec {
  std::string name;
  Shape shape;
  Partition partition;
  bool prunable;
};

inline std::vector<ParamSpec> param_layout(const ModelConfig& cfg) {
  const auto C = static_cast<std::size_t>(cfg.channels);
  const auto K = static_cast<std::size_t>(cfg.kernel);
  const auto R = static_cast<std::size_t>(cfg.ffn_ratio) * C;
  const auto G = static_cast<std::size_t>(cfg.grid_c);
  std::vector<ParamSpec> out;
  out.push_back({"grid",
                 {static_cast<std::size_t>(cfg.grid_t), static_cast<std::size_t>(cfg.grid_h),
                  static_cast<std::size_t>(cfg.grid_w), G},
                 Partition::kOther, false});
  out.push_back({"stem.weight", {C, G}, Partition::kOther, true});
  out.push_back({"stem.bias", {C}, Partition::kOther, false});
  for (int k = 0; k < cfg.spatial_sets(); ++k) {
    const std::string p = "sm." + std::to_string(k) + ".";
    out.push_back({p + "norm.gamma", {C}, Partition::kSpatial, false});
    out.push_back({p + "norm.beta", {C}, Partition::kSpatial, false});
    out.push_back({p + "dw.weight", {K, K, C}, Partition::kSpatial, true});
    out.push_back({p + "dw.bias", {C}, Partition::kSpatial, false});
  }
  for (int k = 0; k < cfg.channel_sets(); ++k) {
    const std::string p = "cm." + std::to_string(k) + ".";
    out.push_back({p + "norm.gamma", {C}, Partition::kChannel, false});
    out.push_back({p + "norm.beta", {C}, Partition::kChannel, false});
    out.push_back({p + "expand.weight", {R, C}, Partition::kChannel, true});
    out.push_back({p + "expand.bias", {R}, Partition::kChannel, false});
    out.push_back({p + "contract.weight", {C, R}, Partition::kChannel, true});
    out.push_back({p + "contract.bias", {C}, Partition::kChannel, false});
  }
  out.push_back({"head.weight", {3, C}, Partition::kOther, false});
  out.push_back({"head.bias", {3}, Partition::kOther, false});
  return out;
}

template <typename T>
struct ParameterStore {
  ModelConfig config;
  Tensor<T> grid;            // [grid_t, grid_h, grid_w, grid_c]
  Tensor<T> stem_w, stem_b;  // [C, grid_c], [C]
  std::vector<SpatialMixing<T>> spatial;
  std::vector<ChannelMixing<T>> channel;
  Tensor<T> head_w, head_b;  // [3, C], [3]
  std::map<std::string, Mask> masks;

  const SpatialMixing<T>& spatial_at(int stage, int pos) const {
    return spatial.at(config.spatial_index(stage, pos));
  }
  const ChannelMixing<T>& channel_at(int stage, int pos) const {
    return channel.at(config.channel_index(stage, pos));
  }

  // Every stored tensor once, in canonical order. Serialization, pruning and
  // the optimizer all walk this list.
  std::vector<NamedParam<T>> named() const {
    std::vector<Tensor<T>> tensors{grid, stem_w, stem_b};
    for (const auto& s : spatial) {
      tensors.insert(tensors.end(), {s.norm_gamma, s.norm_beta, s.kernel, s.bias});
    }
    for (const auto& c : channel) {
      tensors.insert(tensors.end(), {c.norm_gamma, c.norm_beta, c.expand_w, c.expand_b,
                                     c.contract_w, c.contract_b});
    }
    tensors.insert(tensors.end(), {head_w, head_b});
    auto layout = param_layout(config);
    std::vector<NamedParam<T>> out;
    out.reserve(layout.size());
    for (std::size_t i = 0; i < layout.size(); ++i) {
      out.push_back({std::move(layout[i].name), tensors[i], layout[i].partition,
                     layout[i].prunable});
    }
    return out;
  }

  void zero_grad() {
    for (auto& p : named()) p.tensor.zero_grad();
  }
};

// Allocates an uninitialized (all-zero) store with the right tensor layout.
template <typename T>
ParameterStore<T> allocate_store(const ModelConfig& cfg) {
  validate(cfg);
  const auto C = static_cast<std::size_t>(cfg.channels);
  const auto K = static_cast<std::size_t>(cfg.kernel);
  const auto R = static_cast<std::size_t>(cfg.ffn_ratio) * C;
  auto param = [](Shape s) { return Tensor<T>(std::move(s), T(0), true); };

  ParameterStore<T> st;
  st.config = cfg;
  st.grid = param({static_cast<std::size_t>(cfg.grid_t), static_cast<std::size_t>(cfg.grid_h),
                   static_cast<std::size_t>(cfg.grid_w), static_cast<std::size_t>(cfg.grid_c)});
  st.stem_w = param({C, static_cast<std::size_t>(cfg.grid_c)});
  st.stem_b = param({C});
  for (int k = 0; k < cfg.spatial_sets(); ++k) {
    st.spatial.push_back({param({C}), param({C}), param({K, K, C}), param({C})});
  }
  for (int k = 0; k < cfg.channel_sets(); ++k) {
    st.channel.push_back(
        {param({C}), param({C}), param({R, C}), param({R}), param({C, R}), param({C})});
  }
  st.head_w = param({3, C});
  st.head_b = param({3});
  return st;
}

// Initial weights: truncated normal (std 0.02) for the stem, head and
// expansion maps, unit-variance normal for the grid, ones for norm gains and
// zeros elsewhere. Zero depthwise kernels and zero contraction maps make every
// block an exact pass-through at step 0.
template <typename T>
ParameterStore<T> build_model(const ModelConfig& cfg, std::uint64_t seed) {
  auto st = allocate_store<T>(cfg);
  Rng rng(mix_seed(seed, 0x6d6f64656cULL));
  auto fill_tn = [&rng](Tensor<T>& t, double std) {
    for (auto& v : t.values()) v = static_cast<T>(rng.truncated_normal(std));
  };
  auto fill = [](Tensor<T>& t, T v) {
    for (auto& x : t.values()) x = v;
  };
  for (auto& v : st.grid.values()) v = static_cast<T>(rng.normal());
  fill_tn(st.stem_w, 0.02);
  for (auto& s : st.spatial) fill(s.norm_gamma, T(1));
  for (auto& c : st.channel) {
    fill(c.norm_gamma, T(1));
    fill_tn(c.expand_w, 0.02);
  }
  fill_tn(st.head_w, 0.02);
  return st;
}

// Deep copy; the clone shares no tensors with the source, but keeps the
// source's aliasing pattern (one tensor per stored set).
template <typename T>
ParameterStore<T> clone(const ParameterStore<T>& src) {
  ParameterStore<T> dst = allocate_store<T>(src.config);
  auto from = src.named();
  auto to = dst.named();
  for (std::size_t i = 0; i < from.size(); ++i) {
    std::copy(from[i].tensor.values().begin(), from[i].tensor.values().end(),
              to[i].tensor.values().begin());
  }
  dst.masks = src.masks;
  return dst;
}

template <typename T>
bool bit_equal(const ParameterStore<T>& a, const ParameterStore<T>& b) {
  if (!(a.config == b.config) || a.masks != b.masks) return false;
  auto na = a.named();
  auto nb = b.named();
  if (na.size() != nb.size()) return false;
  for (std::size_t i = 0; i < na.size(); ++i) {
    if (na[i].name != nb[i].name || !bit_equal(na[i].tensor, nb[i].tensor)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Forward pass.

// Grid slice for frame t, linearly interpolated along time.
template <typename T>
Tensor<T> base_grid(const ParameterStore<T>& st, int t) {
  const auto& cfg = st.config;
  if (t < 0 || t >= cfg.frames) {
    throw ConfigError("frame index " + std::to_string(t) + " outside [0," +
                      std::to_string(cfg.frames) + ")");
  }
  if (cfg.frames == 1 || cfg.grid_t == 1) return lerp_slices(st.grid, 0, 0, T(0));
  const double pos = static_cast<double>(t) * (cfg.grid_t - 1) / (cfg.frames - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min<std::size_t>(lo + 1, cfg.grid_t - 1);
  return lerp_slices(st.grid, lo, hi, static_cast<T>(pos - static_cast<double>(lo)));
}

template <typename T>
Tensor<T> spatial_mixing(const Tensor<T>& h, const SpatialMixing<T>& sm) {
  return depthwise_conv2d(layer_norm(h, sm.norm_gamma, sm.norm_beta), sm.kernel, sm.bias);
}

template <typename T>
Tensor<T> channel_mixing(const Tensor<T>& y, const ChannelMixing<T>& cm) {
  auto n = layer_norm(y, cm.norm_gamma, cm.norm_beta);
  return pointwise_linear(gelu(pointwise_linear(n, cm.expand_w, cm.expand_b)),
                          cm.contract_w, cm.contract_b);
}

template <typename T>
Tensor<T> srnerv_block(const Tensor<T>& h, const SpatialMixing<T>& sm,
                       const ChannelMixing<T>& cm) {
  detail::require_hwc(h, "srnerv_block");
  detail::require(h.dim(2) == sm.bias.dim(0) && h.dim(2) == cm.contract_b.dim(0),
                  "srnerv_block: feature channels " + std::to_string(h.dim(2)) +
                      " do not match block width");
  auto y = add(spatial_mixing(h, sm), h);
  return add(channel_mixing(y, cm), y);
}

// Renders frame t as [H, W, 3] in (0, 1).
template <typename T>
Tensor<T> generate(const ParameterStore<T>& st, int t) {
  const auto& cfg = st.config;
  auto x = pointwise_linear(base_grid(st, t), st.stem_w, st.stem_b);
  for (int i = 0; i < cfg.stages; ++i) {
    x = bilinear_upsample2(x);
    for (int j = 0; j < cfg.blocks; ++j) {
      x = srnerv_block(x, st.spatial_at(i, j), st.channel_at(i, j));
    }
  }
  return sigmoid(pointwise_linear(x, st.head_w, st.head_b));
}

// ---------------------------------------------------------------------------
// Parameter accounting.

struct ParamCount {
  long long sm_params = 0;
  long long cm_params = 0;
  long long other_params = 0;
  long long total = 0;
  bool operator==(const ParamCount&) const = default;
};

inline long long spatial_set_size(const ModelConfig& c) {
  const long long C = c.channels, K = c.kernel;
  return C * K * K + C + 2 * C;
}

inline long long channel_set_size(const ModelConfig& c) {
  const long long C = c.channels, R = static_cast<long long>(c.ffn_ratio) * C;
  return 2 * C + (C * R + R) + (R * C + C);
}

inline ParamCount count_params(const ModelConfig& c) {
  ParamCount n;
  n.sm_params = c.spatial_sets() * spatial_set_size(c);
  n.cm_params = c.channel_sets() * channel_set_size(c);
  const long long C = c.channels;
  n.other_params = static_cast<long long>(c.grid_t) * c.grid_h * c.grid_w * c.grid_c +
                   (static_cast<long long>(c.grid_c) * C + C) + (3 * C + 3);
  n.total = n.sm_params + n.cm_params + n.other_params;
  return n;
}

constexpr int kMaxBudgetChannels = 1024;

// Picks the channel width whose total parameter count is closest to
// `target_total`; ties go to the smaller width.
inline ModelConfig match_budget(long long target_total, const ModelConfig& tmpl) {
  if (target_total <= 0) throw ConfigError("parameter budget must be positive");
  ModelConfig best = tmpl;
  long long best_gap = std::numeric_limits<long long>::max();
  for (int C = 1; C <= kMaxBudgetChannels; ++C) {
    ModelConfig cand = tmpl;
    cand.channels = C;
    const long long gap = std::llabs(count_params(cand).total - target_total);
    if (gap < best_gap) {
      best_gap = gap;
      best = cand;
    }
  }
  if (static_cast<double>(best_gap) > 0.2 * static_cast<double>(target_total)) {
    throw ConfigError("no channel width within 20% of budget " +
                      std::to_string(target_total) + " (closest total " +
                      std::to_string(count_params(best).total) + ")");
  }
  return best;
}

}  // namespace srnerv
