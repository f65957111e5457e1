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

// Video containers, raw/PNG frame I/O and synthetic test content.
//
// Raw layout: <name>.rgb holds T frames, each as three planes (R, G, B) of
// H*W bytes; <name>.dims holds "T H W\n".

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#ifdef SRNERV_WITH_PNG
#include <png.h>
#endif

#include "srnerv/errors.hpp"
#include "srnerv/rng.hpp"
#include "srnerv/tensor.hpp"

namespace srnerv {

// T frames of H x W x 3 samples in [0, 1], interleaved per pixel.
struct VideoTensor {
  int frames = 0, height = 0, width = 0;
  std::vector<float> data;

  VideoTensor() = default;
  VideoTensor(int t, int h, int w)
      : frames(t), height(h), width(w),
        data(static_cast<std::size_t>(t) * h * w * 3, 0.0f) {}

  std::size_t frame_size() const { return static_cast<std::size_t>(height) * width * 3; }
  std::size_t index(int t, int y, int x, int c) const {
    return ((static_cast<std::size_t>(t) * height + y) * width + x) * 3 + c;
  }
  float& at(int t, int y, int x, int c) { return data[index(t, y, x, c)]; }
  float at(int t, int y, int x, int c) const { return data[index(t, y, x, c)]; }

  template <typename T = float>
  Tensor<T> frame(int t) const {
    std::vector<T> v(frame_size());
    const float* src = &data[t * frame_size()];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<T>(src[i]);
    return Tensor<T>({static_cast<std::size_t>(height), static_cast<std::size_t>(width), 3},
                     std::move(v));
  }

  template <typename T>
  void set_frame(int t, const Tensor<T>& f) {
    float* dst = &data[t * frame_size()];
    auto v = f.values();
    if (v.size() != frame_size()) throw ShapeError("set_frame: size mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) dst[i] = static_cast<float>(v[i]);
  }

  bool operator==(const VideoTensor&) const = default;
};

inline std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

// Rounds every sample onto the 8-bit grid.
inline VideoTensor quantize_8bit(VideoTensor v) {
  for (auto& x : v.data) x = static_cast<float>(to_byte(x)) / 255.0f;
  return v;
}

// ---------------------------------------------------------------------------
// Raw planar RGB.

inline std::filesystem::path sidecar_path(const std::filesystem::path& rgb) {
  auto p = rgb;
  p.replace_extension(".dims");
  return p;
}

inline void save_raw(const VideoTensor& v, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::size_t plane = static_cast<std::size_t>(v.height) * v.width;
  std::vector<char> buf(plane * 3);
  for (int t = 0; t < v.frames; ++t) {
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < v.height; ++y) {
        for (int x = 0; x < v.width; ++x) {
          buf[c * plane + static_cast<std::size_t>(y) * v.width + x] =
              static_cast<char>(to_byte(v.at(t, y, x, c)));
        }
      }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  std::ofstream dims(sidecar_path(path));
  dims << v.frames << ' ' << v.height << ' ' << v.width << '\n';
  if (!out || !dims) throw IoError("write failed for " + path.string());
}

inline VideoTensor load_raw(const std::filesystem::path& path) {
  const auto dims_path = sidecar_path(path);
  std::ifstream dims(dims_path);
  if (!dims) throw SidecarError("missing sidecar " + dims_path.string());
  std::string text((std::istreambuf_iterator<char>(dims)), std::istreambuf_iterator<char>());
  std::istringstream ss(text);
  long t = 0, h = 0, w = 0;
  std::string extra;
  if (!(ss >> t >> h >> w) || (ss >> extra) || t < 1 || h < 1 || w < 1 ||
      t > 100000 || h > 65536 || w > 65536) {
    throw SidecarError("sidecar " + dims_path.string() + " must hold three positive integers \"T H W\"");
  }
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot read " + path.string());
  const std::uintmax_t expected = static_cast<std::uintmax_t>(t) * h * w * 3;
  if (size != expected) {
    throw DimensionError(path.string() + " holds " + std::to_string(size) +
                         " bytes but T H W = " + std::to_string(t) + " " + std::to_string(h) +
                         " " + std::to_string(w) + " needs " + std::to_string(expected));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  VideoTensor v(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w));
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<unsigned char> buf(plane * 3);
  for (int f = 0; f < v.frames; ++f) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw IoError("short read in " + path.string());
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < v.height; ++y) {
        for (int x = 0; x < v.width; ++x) {
          v.at(f, y, x, c) =
              static_cast<float>(buf[c * plane + static_cast<std::size_t>(y) * w + x]) / 255.0f;
        }
      }
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Directory of numerically named PNG frames (0.png, 1.png or 00000.png ...).

inline bool png_supported() {
#ifdef SRNERV_WITH_PNG
  return true;
#else
  return false;
#endif
}

#ifdef SRNERV_WITH_PNG
namespace detail {

inline void read_png(const std::filesystem::path& path, int& w, int& h,
                     std::vector<std::uint8_t>& rgb) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw IoError("cannot decode " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  w = static_cast<int>(image.width);
  h = static_cast<int>(image.height);
  rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode " + path.string() + ": " + image.message);
  }
}

inline void write_png(const std::filesystem::path& path, int w, int h,
                      const std::vector<std::uint8_t>& rgb) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, rgb.data(), 0, nullptr)) {
    throw IoError("cannot write " + path.string() + ": " + image.message);
  }
}

}  // namespace detail
#endif

inline VideoTensor load_png_dir(const std::filesystem::path& dir) {
#ifndef SRNERV_WITH_PNG
  throw IoError("PNG support not compiled in; cannot read " + dir.string());
#else
  std::map<long, std::filesystem::path> frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    const std::string stem = entry.path().stem().string();
    long idx = -1;
    auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), idx);
    if (ec != std::errc() || ptr != stem.data() + stem.size() || idx < 0) continue;
    frames[idx] = entry.path();
  }
  if (frames.empty()) throw MissingFrameError("no numbered PNG frames in " + dir.string(), 0);
  const long last = frames.rbegin()->first;
  for (long i = 0; i <= last; ++i) {
    if (!frames.count(i)) {
      throw MissingFrameError("frame " + std::to_string(i) + " missing in " + dir.string(), i);
    }
  }
  VideoTensor v;
  std::vector<std::uint8_t> rgb;
  for (const auto& [idx, path] : frames) {
    int w = 0, h = 0;
    detail::read_png(path, w, h, rgb);
    if (idx == 0) {
      v = VideoTensor(static_cast<int>(last + 1), h, w);
    } else if (w != v.width || h != v.height) {
      throw DimensionError("frame " + std::to_string(idx) + " is " + std::to_string(w) + "x" +
                           std::to_string(h) + ", expected " + std::to_string(v.width) + "x" +
                           std::to_string(v.height));
    }
    float* dst = &v.data[static_cast<std::size_t>(idx) * v.frame_size()];
    for (std::size_t i = 0; i < rgb.size(); ++i) dst[i] = static_cast<float>(rgb[i]) / 255.0f;
  }
  return v;
#endif
}

inline void save_png_dir(const VideoTensor& v, const std::filesystem::path& dir) {
#ifndef SRNERV_WITH_PNG
  (void)v;
  throw IoError("PNG support not compiled in; cannot write " + dir.string());
#else
  std::filesystem::create_directories(dir);
  std::vector<std::uint8_t> rgb(v.frame_size());
  for (int t = 0; t < v.frames; ++t) {
    const float* src = &v.data[t * v.frame_size()];
    for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = to_byte(src[i]);
    detail::write_png(dir / (std::to_string(t) + ".png"), v.width, v.height, rgb);
  }
#endif
}

// A directory means PNG frames; anything else is treated as a raw .rgb file.
inline VideoTensor load_video(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return load_png_dir(path);
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  return load_raw(path);
}

inline void save_video(const VideoTensor& v, const std::filesystem::path& path) {
  if (path.extension() == ".rgb") {
    save_raw(v, path);
  } else {
    save_png_dir(v, path);
  }
}

// ---------------------------------------------------------------------------
// Synthetic content.

enum class SynthKind { kMovingSquare, kTextGrid, kGradientPan };

inline SynthKind parse_synth_kind(const std::string& s) {
  if (s == "static_bg_moving_square") return SynthKind::kMovingSquare;
  if (s == "text_grid") return SynthKind::kTextGrid;
  if (s == "smooth_gradient_pan") return SynthKind::kGradientPan;
  throw ConfigError("unknown synth kind '" + s + "'");
}

inline const char* to_string(SynthKind k) {
  switch (k) {
    case SynthKind::kMovingSquare: return "static_bg_moving_square";
    case SynthKind::kTextGrid: return "text_grid";
    case SynthKind::kGradientPan: return "smooth_gradient_pan";
  }
  return "?";
}

struct SynthSpec {
  SynthKind kind = SynthKind::kMovingSquare;
  int frames = 8, height = 64, width = 64;
  std::uint64_t seed = 0;
  // static_bg_moving_square
  int square_size = 12;
  int velocity_x = 3, velocity_y = 2;  // pixels per frame, wrapping
  // text_grid
  int cell_size = 4;
  int scene_length = 4;  // frames between glyph re-randomizations
  // smooth_gradient_pan
  double pan_speed = 1.0;  // pixels per frame
};

inline VideoTensor synth_video(const SynthSpec& spec) {
  if (spec.frames < 1 || spec.height < 1 || spec.width < 1) {
    throw ConfigError("synth: extents must be positive");
  }
  VideoTensor v(spec.frames, spec.height, spec.width);
  Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(spec.kind) + 100));
  const double two_pi = 2.0 * std::numbers::pi;

  switch (spec.kind) {
    case SynthKind::kMovingSquare: {
      // Background: a few low-frequency color waves, fixed over time.
      struct Wave { double fx, fy, phase, amp[3]; };
      std::vector<Wave> waves(3);
      for (auto& w : waves) {
        w.fx = rng.uniform(0.5, 2.5) / spec.width;
        w.fy = rng.uniform(0.5, 2.5) / spec.height;
        w.phase = rng.uniform(0.0, two_pi);
        for (double& a : w.amp) a = rng.uniform(-0.15, 0.15);
      }
      double base[3], color[3];
      for (double& b : base) b = rng.uniform(0.35, 0.65);
      for (double& c : color) c = rng.uniform() < 0.5 ? rng.uniform(0.0, 0.15) : rng.uniform(0.85, 1.0);
      const int x0 = static_cast<int>(rng.below(spec.width));
      const int y0 = static_cast<int>(rng.below(spec.height));
      const int s = std::min({spec.square_size, spec.width, spec.height});
      for (int t = 0; t < spec.frames; ++t) {
        for (int y = 0; y < spec.height; ++y) {
          for (int x = 0; x < spec.width; ++x) {
            for (int c = 0; c < 3; ++c) {
              double val = base[c];
              for (const auto& w : waves) {
                val += w.amp[c] * std::sin(two_pi * (w.fx * x + w.fy * y) + w.phase);
              }
              v.at(t, y, x, c) = static_cast<float>(std::clamp(val, 0.0, 1.0));
            }
          }
        }
        const int sx = ((x0 + spec.velocity_x * t) % spec.width + spec.width) % spec.width;
        const int sy = ((y0 + spec.velocity_y * t) % spec.height + spec.height) % spec.height;
        for (int dy = 0; dy < s; ++dy) {
          for (int dx = 0; dx < s; ++dx) {
            const int y = (sy + dy) % spec.height, x = (sx + dx) % spec.width;
            for (int c = 0; c < 3; ++c) v.at(t, y, x, c) = static_cast<float>(color[c]);
          }
        }
      }
      break;
    }
    case SynthKind::kTextGrid: {
      // Binary glyph-like blocks on a light page, re-drawn every scene.
      const int cell = std::max(1, spec.cell_size);
      const int gh = (spec.height + cell - 1) / cell, gw = (spec.width + cell - 1) / cell;
      const int scene = std::max(1, spec.scene_length);
      std::vector<std::uint8_t> ink;
      for (int t = 0; t < spec.frames; ++t) {
        if (t % scene == 0) {
          ink.assign(static_cast<std::size_t>(gh) * gw, 0);
          for (auto& b : ink) b = rng.uniform() < 0.45 ? 1 : 0;
        }
        for (int y = 0; y < spec.height; ++y) {
          for (int x = 0; x < spec.width; ++x) {
            const bool on = ink[static_cast<std::size_t>(y / cell) * gw + x / cell];
            for (int c = 0; c < 3; ++c) v.at(t, y, x, c) = on ? 0.05f : 0.95f;
          }
        }
      }
      break;
    }
    case SynthKind::kGradientPan: {
      const double angle = rng.uniform(0.0, two_pi);
      const double dx = std::cos(angle), dy = std::sin(angle);
      double lo[3], hi[3];
      for (int c = 0; c < 3; ++c) {
        lo[c] = rng.uniform(0.1, 0.4);
        hi[c] = rng.uniform(0.6, 0.9);
      }
      const double period = 2.0 * std::max(spec.width, spec.height);
      for (int t = 0; t < spec.frames; ++t) {
        const double shift = spec.pan_speed * t;
        for (int y = 0; y < spec.height; ++y) {
          for (int x = 0; x < spec.width; ++x) {
            const double s = ((x + shift) * dx + y * dy) / period;
            const double a = 0.5 + 0.5 * std::sin(two_pi * s);
            for (int c = 0; c < 3; ++c) {
              v.at(t, y, x, c) = static_cast<float>(lo[c] + (hi[c] - lo[c]) * a);
            }
          }
        }
      }
      break;
    }
  }
  // Snap to 8-bit so a save/load roundtrip returns the identical tensor.
  return quantize_8bit(std::move(v));
}

}  // namespace srnerv
