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

// Weight quantization, per-tensor probability tables, a 32-bit range coder
// and the .srnv bitstream container.
//
// Container layout, all integers little-endian:
//
//   "SRNV"  u8 version (=1)
//   config  u16 stages, u16 blocks, u16 channels, u16 kernel, u16 ffn_ratio,
//           u32 grid_t, u32 grid_h, u32 grid_w, u32 grid_c, u16 share_mode,
//           u32 frames, u32 height, u32 width, u16 bits
//   u16 tensor count, then per tensor in canonical parameter order:
//           u8 name length, name bytes, u8 rank, rank x u32 extents,
//           f32 max_abs, u8 mask flag [u32 run count, runs as LEB128],
//           (2^bits - 1) x u32 symbol counts
//   u64 payload length, payload bytes (one range-coded stream over all
//           unmasked symbols of all tensors, in directory order)
//   u32 CRC-32 of every preceding byte
//
// Mask runs alternate kept/pruned, starting with a (possibly empty) kept run.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "srnerv/errors.hpp"
#include "srnerv/media_io.hpp"
#include "srnerv/model.hpp"
#include "srnerv/tensor.hpp"

namespace srnerv {

constexpr std::uint8_t kBitstreamVersion = 1;
constexpr std::array<char, 4> kBitstreamMagic = {'S', 'R', 'N', 'V'};
constexpr std::uint32_t kMaxTableTotal = 1u << 16;

inline int max_symbol(int bits) { return (1 << (bits - 1)) - 1; }
inline int alphabet_size(int bits) { return 2 * max_symbol(bits) + 1; }

inline void check_bits(int bits) {
  if (bits < 2 || bits > 8) throw ConfigError("quantization bits must be in [2,8]");
}

// ---------------------------------------------------------------------------
// Quantization.

struct FreqTable {
  std::vector<std::uint32_t> counts;  // index = symbol + max_symbol
  std::uint32_t total = 0;

  bool operator==(const FreqTable&) const = default;
};

struct QuantizedTensor {
  std::string name;
  Shape shape;
  Partition partition = Partition::kOther;
  int bits = 6;
  // Largest unmasked magnitude. The quantization step is
  // max_abs / max_symbol(bits); storing the range instead of the step keeps
  // +-max_symbol decoding to exactly +-max_abs.
  float max_abs = 0.0f;
  std::optional<Mask> mask;
  std::vector<std::int8_t> symbols;  // unmasked entries in flat order
  FreqTable table;

  double step() const { return static_cast<double>(max_abs) / max_symbol(bits); }
  bool operator==(const QuantizedTensor&) const = default;
};

inline float dequantize_symbol(int symbol, float max_abs, int bits) {
  return static_cast<float>(static_cast<double>(max_abs) * symbol / max_symbol(bits));
}

// Symmetric uniform quantization with round-half-away-from-zero. Masked
// entries are skipped and do not influence the range.
template <typename T>
QuantizedTensor quantize_tensor(std::span<const T> w, const Mask* mask, int bits) {
  check_bits(bits);
  if (mask && mask->size() != w.size()) throw ShapeError("quantize: mask size mismatch");
  const int qmax = max_symbol(bits);
  float max_abs = 0.0f;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (mask && (*mask)[i]) continue;
    max_abs = std::max(max_abs, static_cast<float>(std::abs(static_cast<double>(w[i]))));
  }
  QuantizedTensor q;
  q.bits = bits;
  q.max_abs = max_abs;
  if (mask) q.mask = *mask;
  q.symbols.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (mask && (*mask)[i]) continue;
    int s = 0;
    if (max_abs > 0.0f) {
      const double r = std::round(static_cast<double>(w[i]) * qmax / static_cast<double>(max_abs));
      s = static_cast<int>(std::clamp(r, -static_cast<double>(qmax), static_cast<double>(qmax)));
    }
    q.symbols.push_back(static_cast<std::int8_t>(s));
  }
  return q;
}

template <typename T>
void dequantize_into(const QuantizedTensor& q, std::span<T> out) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (q.mask && (*q.mask)[i]) {
      out[i] = T(0);
    } else {
      out[i] = static_cast<T>(dequantize_symbol(q.symbols.at(k++), q.max_abs, q.bits));
    }
  }
}

// Add-one smoothed histogram over the whole alphabet, scaled down if needed
// so the total fits the range coder's precision.
inline FreqTable build_freq_table(std::span<const std::int8_t> symbols, int bits) {
  check_bits(bits);
  const int qmax = max_symbol(bits);
  const auto n = static_cast<std::size_t>(alphabet_size(bits));
  std::vector<std::uint64_t> hist(n, 1);
  for (auto s : symbols) {
    if (s < -qmax || s > qmax) throw ConfigError("symbol outside the quantizer range");
    ++hist[static_cast<std::size_t>(s + qmax)];
  }
  std::uint64_t total = 0;
  for (auto c : hist) total += c;
  FreqTable t;
  t.counts.resize(n);
  if (total > kMaxTableTotal) {
    const double f = static_cast<double>(kMaxTableTotal - n) / static_cast<double>(total);
    for (std::size_t i = 0; i < n; ++i) {
      t.counts[i] = 1 + static_cast<std::uint32_t>(std::floor(static_cast<double>(hist[i]) * f));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) t.counts[i] = static_cast<std::uint32_t>(hist[i]);
  }
  for (auto c : t.counts) t.total += c;
  return t;
}

// ---------------------------------------------------------------------------
// Range coder: 32-bit range, carry propagated through a cached byte.

class RangeEncoder {
 public:
  void encode(std::uint32_t start, std::uint32_t freq, std::uint32_t total) {
    range_ /= total;
    low_ += static_cast<std::uint64_t>(start) * range_;
    range_ *= freq;
    while (range_ < kTop) {
      range_ <<= 8;
      shift_low();
    }
  }

  void encode_symbol(int symbol, const FreqTable& table, int bits);

  std::vector<std::uint8_t> finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
  }

 private:
  static constexpr std::uint32_t kTop = 1u << 24;

  void shift_low() {
    if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
      const auto carry = static_cast<std::uint8_t>(low_ >> 32);
      std::uint8_t byte = cache_;
      do {
        out_.push_back(static_cast<std::uint8_t>(byte + carry));
        byte = 0xFF;
      } while (--pending_ != 0);
      cache_ = static_cast<std::uint8_t>(low_ >> 24);
    }
    ++pending_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
  }

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t pending_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> in) : in_(in) {
    for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
  }

  // Cumulative frequency of the next symbol; call consume() afterwards.
  std::uint32_t peek(std::uint32_t total) {
    range_ /= total;
    return std::min(code_ / range_, total - 1);
  }

  void consume(std::uint32_t start, std::uint32_t freq) {
    code_ -= start * range_;
    range_ *= freq;
    while (range_ < kTop) {
      code_ = (code_ << 8) | next_byte();
      range_ <<= 8;
    }
  }

  int decode_symbol(const FreqTable& table, int bits);

  std::size_t position() const { return pos_; }

 private:
  static constexpr std::uint32_t kTop = 1u << 24;

  std::uint32_t next_byte() {
    if (pos_ >= in_.size()) {
      throw BitstreamError(BitstreamErrorKind::kTruncated, "range decoder ran past the payload");
    }
    return in_[pos_++];
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

namespace detail {

inline void check_table(const FreqTable& t, int bits) {
  if (t.counts.size() != static_cast<std::size_t>(alphabet_size(bits)) || t.total == 0 ||
      t.total > kMaxTableTotal) {
    throw ConfigError("frequency table does not fit the alphabet or coder precision");
  }
}

inline std::uint32_t cumulative(const FreqTable& t, std::size_t idx) {
  std::uint32_t c = 0;
  for (std::size_t i = 0; i < idx; ++i) c += t.counts[i];
  return c;
}

}  // namespace detail

inline void RangeEncoder::encode_symbol(int symbol, const FreqTable& table, int bits) {
  const int qmax = max_symbol(bits);
  if (symbol < -qmax || symbol > qmax) throw ConfigError("symbol outside the alphabet");
  const auto idx = static_cast<std::size_t>(symbol + qmax);
  if (table.counts[idx] == 0) throw ConfigError("symbol has zero probability");
  encode(detail::cumulative(table, idx), table.counts[idx], table.total);
}

inline int RangeDecoder::decode_symbol(const FreqTable& table, int bits) {
  const std::uint32_t target = peek(table.total);
  std::uint32_t start = 0;
  std::size_t idx = 0;
  for (; idx + 1 < table.counts.size(); ++idx) {
    if (start + table.counts[idx] > target) break;
    start += table.counts[idx];
  }
  consume(start, table.counts[idx]);
  return static_cast<int>(idx) - max_symbol(bits);
}

// Single-table convenience wrappers.
inline std::vector<std::uint8_t> arith_encode(std::span<const std::int8_t> symbols,
                                              const FreqTable& table, int bits) {
  detail::check_table(table, bits);
  RangeEncoder enc;
  for (auto s : symbols) enc.encode_symbol(s, table, bits);
  return enc.finish();
}

inline std::vector<std::int8_t> arith_decode(std::span<const std::uint8_t> bytes,
                                             const FreqTable& table, int bits, std::size_t n) {
  detail::check_table(table, bits);
  RangeDecoder dec(bytes);
  std::vector<std::int8_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(static_cast<std::int8_t>(dec.decode_symbol(table, bits)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rate accounting: sum over symbols of -log2(count / total).

struct RateEstimate {
  double spatial_bits = 0.0;
  double channel_bits = 0.0;
  double other_bits = 0.0;  // grid, stem and head
  double total_bits = 0.0;
};

inline double codelength_bits(const QuantizedTensor& q) {
  const int qmax = max_symbol(q.bits);
  double bits = 0.0;
  for (auto s : q.symbols) {
    const std::uint32_t c = q.table.counts.at(static_cast<std::size_t>(s + qmax));
    if (c == 0) throw ConfigError("estimate_rate: symbol with zero probability in " + q.name);
    bits -= std::log2(static_cast<double>(c) / static_cast<double>(q.table.total));
  }
  return bits;
}

struct QuantizedModel {
  ModelConfig config;
  int bits = 6;
  std::vector<QuantizedTensor> tensors;  // canonical parameter order

  bool operator==(const QuantizedModel&) const = default;
};

inline RateEstimate estimate_rate(std::span<const QuantizedTensor> tensors) {
  RateEstimate r;
  for (const auto& q : tensors) {
    const double b = codelength_bits(q);
    switch (q.partition) {
      case Partition::kSpatial: r.spatial_bits += b; break;
      case Partition::kChannel: r.channel_bits += b; break;
      case Partition::kOther: r.other_bits += b; break;
    }
  }
  r.total_bits = r.spatial_bits + r.channel_bits + r.other_bits;
  return r;
}

inline RateEstimate estimate_rate(const QuantizedModel& qm) { return estimate_rate(qm.tensors); }

// Quantizes every stored tensor (shared sets once) and attaches its table.
template <typename T>
QuantizedModel quantize_store(const ParameterStore<T>& st, int bits) {
  check_bits(bits);
  QuantizedModel qm;
  qm.config = st.config;
  qm.bits = bits;
  for (const auto& p : st.named()) {
    auto it = st.masks.find(p.name);
    const Mask* mask = it == st.masks.end() ? nullptr : &it->second;
    auto q = quantize_tensor<T>(p.tensor.values(), mask, bits);
    q.name = p.name;
    q.shape = p.tensor.shape();
    q.partition = p.partition;
    q.table = build_freq_table(q.symbols, bits);
    qm.tensors.push_back(std::move(q));
  }
  return qm;
}

template <typename T = float>
ParameterStore<T> dequantize_store(const QuantizedModel& qm) {
  auto st = allocate_store<T>(qm.config);
  auto named = st.named();
  if (named.size() != qm.tensors.size()) throw ConfigError("quantized model does not match its config");
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& q = qm.tensors[i];
    if (q.name != named[i].name || q.shape != named[i].tensor.shape()) {
      throw ConfigError("quantized tensor " + q.name + " does not match the layout");
    }
    dequantize_into<T>(q, named[i].tensor.values());
    if (q.mask) st.masks[q.name] = *q.mask;
  }
  return st;
}

// ---------------------------------------------------------------------------
// Byte-level container.

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = ::crc32(crc, bytes.data() + off, n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      out_.push_back(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = u8();
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) return v;
    }
    throw BitstreamError(BitstreamErrorKind::kMalformed, "varint too long");
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > in_.size() - pos_) {
      throw BitstreamError(BitstreamErrorKind::kTruncated,
                           "needed " + std::to_string(n) + " bytes at offset " + std::to_string(pos_));
    }
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

[[noreturn]] inline void malformed(const std::string& what) {
  throw BitstreamError(BitstreamErrorKind::kMalformed, what);
}

}  // namespace detail

// The entropy-coded payload: every tensor's symbols, in directory order, in
// one continuous range-coder stream.
inline std::vector<std::uint8_t> encode_payload(const QuantizedModel& qm) {
  RangeEncoder enc;
  for (const auto& q : qm.tensors) {
    for (auto s : q.symbols) enc.encode_symbol(s, q.table, qm.bits);
  }
  return enc.finish();
}

// Writes an already quantized model. Tables are taken as given, so
// parse -> serialize reproduces the input bytes.
inline std::vector<std::uint8_t> serialize_quantized(const QuantizedModel& qm) {
  const auto& c = qm.config;
  check_bits(qm.bits);
  detail::ByteWriter w;
  for (char ch : kBitstreamMagic) w.u8(static_cast<std::uint8_t>(ch));
  w.u8(kBitstreamVersion);
  w.u16(static_cast<std::uint16_t>(c.stages));
  w.u16(static_cast<std::uint16_t>(c.blocks));
  w.u16(static_cast<std::uint16_t>(c.channels));
  w.u16(static_cast<std::uint16_t>(c.kernel));
  w.u16(static_cast<std::uint16_t>(c.ffn_ratio));
  w.u32(static_cast<std::uint32_t>(c.grid_t));
  w.u32(static_cast<std::uint32_t>(c.grid_h));
  w.u32(static_cast<std::uint32_t>(c.grid_w));
  w.u32(static_cast<std::uint32_t>(c.grid_c));
  w.u16(static_cast<std::uint16_t>(c.share));
  w.u32(static_cast<std::uint32_t>(c.frames));
  w.u32(static_cast<std::uint32_t>(c.height));
  w.u32(static_cast<std::uint32_t>(c.width));
  w.u16(static_cast<std::uint16_t>(qm.bits));
  if (qm.tensors.size() > 0xFFFF) throw ConfigError("too many tensors for the directory");
  w.u16(static_cast<std::uint16_t>(qm.tensors.size()));

  for (const auto& q : qm.tensors) {
    if (q.name.size() > 0xFF || q.shape.size() > 0xFF) throw ConfigError("tensor name/rank too long");
    if (q.bits != qm.bits) throw ConfigError("mixed bit depths in one model");
    detail::check_table(q.table, qm.bits);
    w.u8(static_cast<std::uint8_t>(q.name.size()));
    w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(q.name.data()), q.name.size()));
    w.u8(static_cast<std::uint8_t>(q.shape.size()));
    for (auto e : q.shape) w.u32(static_cast<std::uint32_t>(e));
    w.f32(q.max_abs);
    if (q.mask) {
      w.u8(1);
      std::vector<std::uint64_t> runs;
      std::uint8_t state = 0;
      std::uint64_t run = 0;
      for (auto m : *q.mask) {
        if ((m ? 1 : 0) == state) {
          ++run;
        } else {
          runs.push_back(run);
          state ^= 1;
          run = 1;
        }
      }
      runs.push_back(run);
      w.u32(static_cast<std::uint32_t>(runs.size()));
      for (auto r : runs) w.varint(r);
    } else {
      w.u8(0);
    }
    for (auto cnt : q.table.counts) w.u32(cnt);
  }
  const auto payload = encode_payload(qm);
  w.u64(payload.size());
  w.bytes(payload);
  w.u32(crc32_of(w.buffer()));
  return std::move(w.buffer());
}

template <typename T>
std::vector<std::uint8_t> serialize(const ParameterStore<T>& st, int bits) {
  return serialize_quantized(quantize_store(st, bits));
}

// Upper bound on stored scalars accepted from a stream.
constexpr long long kMaxStreamParams = 1LL << 26;

// Parses and entropy-decodes a stream. Every failure is a BitstreamError.
inline QuantizedModel parse(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  const auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kBitstreamMagic.begin())) {
    throw BitstreamError(BitstreamErrorKind::kBadMagic, "");
  }
  const auto version = r.u8();
  if (version != kBitstreamVersion) {
    throw BitstreamError(BitstreamErrorKind::kUnsupportedVersion,
                         "version " + std::to_string(version));
  }
  QuantizedModel qm;
  auto& c = qm.config;
  c.stages = r.u16();
  c.blocks = r.u16();
  c.channels = r.u16();
  c.kernel = r.u16();
  c.ffn_ratio = r.u16();
  auto u32_int = [&r]() {
    const std::uint32_t v = r.u32();
    if (v > 0x7FFFFFFFu) detail::malformed("field out of range");
    return static_cast<int>(v);
  };
  c.grid_t = u32_int();
  c.grid_h = u32_int();
  c.grid_w = u32_int();
  c.grid_c = u32_int();
  const auto share = r.u16();
  if (share > 2) detail::malformed("unknown share mode " + std::to_string(share));
  c.share = static_cast<ShareMode>(share);
  c.frames = u32_int();
  c.height = u32_int();
  c.width = u32_int();
  qm.bits = r.u16();
  if (qm.bits < 2 || qm.bits > 8) detail::malformed("bits " + std::to_string(qm.bits));
  try {
    validate(c);
  } catch (const ConfigError& e) {
    detail::malformed(e.what());
  }
  if (count_params(c).total > kMaxStreamParams) detail::malformed("model too large");

  const auto layout = param_layout(c);
  const std::size_t count = r.u16();
  if (count != layout.size()) detail::malformed("directory size does not match config");
  const auto nsym = static_cast<std::size_t>(alphabet_size(qm.bits));
  for (std::size_t i = 0; i < count; ++i) {
    QuantizedTensor q;
    q.bits = qm.bits;
    const auto name = r.take(r.u8());
    q.name.assign(name.begin(), name.end());
    const std::size_t rank = r.u8();
    for (std::size_t d = 0; d < rank; ++d) q.shape.push_back(r.u32());
    if (q.name != layout[i].name || q.shape != layout[i].shape) {
      detail::malformed("directory entry " + std::to_string(i) + " does not match the layout");
    }
    q.partition = layout[i].partition;
    q.max_abs = r.f32();
    if (!std::isfinite(q.max_abs) || q.max_abs < 0.0f) detail::malformed("bad range in " + q.name);
    const std::size_t n = numel(q.shape);
    std::size_t kept = n;
    const auto flag = r.u8();
    if (flag == 1) {
      const std::uint32_t nruns = r.u32();
      if (nruns == 0 || nruns > n + 1) detail::malformed("bad mask run count in " + q.name);
      Mask mask;
      mask.reserve(n);
      std::uint8_t state = 0;
      for (std::uint32_t k = 0; k < nruns; ++k) {
        const std::uint64_t run = r.varint();
        if (run > n - mask.size()) detail::malformed("mask runs overflow " + q.name);
        if (run == 0 && k != 0) detail::malformed("empty mask run in " + q.name);
        mask.insert(mask.end(), run, state);
        state ^= 1;
      }
      if (mask.size() != n) detail::malformed("mask runs do not cover " + q.name);
      kept = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 0));
      q.mask = std::move(mask);
    } else if (flag != 0) {
      detail::malformed("bad mask flag in " + q.name);
    }
    q.table.counts.resize(nsym);
    std::uint64_t total = 0;
    for (auto& cnt : q.table.counts) {
      cnt = r.u32();
      if (cnt == 0) detail::malformed("zero count in table of " + q.name);
      total += cnt;
    }
    if (total > kMaxTableTotal) detail::malformed("table total too large in " + q.name);
    q.table.total = static_cast<std::uint32_t>(total);
    q.symbols.resize(kept);  // filled from the payload below
    qm.tensors.push_back(std::move(q));
  }
  const std::uint64_t payload_len = r.u64();
  if (payload_len > r.remaining()) {
    throw BitstreamError(BitstreamErrorKind::kTruncated, "payload shorter than declared");
  }
  const auto payload = r.take(static_cast<std::size_t>(payload_len));
  const std::size_t crc_offset = r.position();
  const std::uint32_t stored_crc = r.u32();
  if (r.remaining() != 0) detail::malformed("trailing bytes after checksum");
  if (crc32_of(bytes.first(crc_offset)) != stored_crc) {
    throw BitstreamError(BitstreamErrorKind::kChecksumMismatch, "");
  }

  RangeDecoder dec(payload);
  for (auto& q : qm.tensors) {
    for (auto& s : q.symbols) s = static_cast<std::int8_t>(dec.decode_symbol(q.table, qm.bits));
  }
  return qm;
}

// Renders every frame of a model. Used on both sides of the codec so the
// decoder output matches the encoder's quantized rendering bit for bit.
template <typename T>
VideoTensor render_video(const ParameterStore<T>& st) {
  NoGradGuard no_grad;
  const auto& c = st.config;
  VideoTensor v(c.frames, c.height, c.width);
  for (int t = 0; t < c.frames; ++t) v.set_frame(t, generate(st, t));
  return v;
}

inline VideoTensor decode_video(std::span<const std::uint8_t> bytes) {
  return render_video(dequantize_store<float>(parse(bytes)));
}

}  // namespace srnerv
