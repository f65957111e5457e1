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


// Float checkpoints: the full-precision store plus pruning masks in a
// length-prefixed little-endian binary form.
//
//   "SRCK" u8 version
//   u32 config-text length, config text (key=value lines)
//   u16 tensor count
//   per tensor: u8 name length, name, u64 numel, numel x f32,
//               u8 mask flag, [numel x u8 mask]
//   u32 CRC-32 of everything before it

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "srnerv/codec.hpp"
#include "srnerv/errors.hpp"
#include "srnerv/model.hpp"

namespace srnerv {

constexpr std::array<char, 4> kCheckpointMagic = {'S', 'R', 'C', 'K'};
constexpr std::uint8_t kCheckpointVersion = 1;

inline std::vector<std::uint8_t> checkpoint_bytes(const ParameterStore<float>& st) {
  detail::ByteWriter w;
  for (char ch : kCheckpointMagic) w.u8(static_cast<std::uint8_t>(ch));
  w.u8(kCheckpointVersion);
  const auto text = to_text(st.config);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  const auto params = st.named();
  w.u16(static_cast<std::uint16_t>(params.size()));
  for (const auto& p : params) {
    w.u8(static_cast<std::uint8_t>(p.name.size()));
    w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(p.name.data()), p.name.size()));
    w.u64(p.tensor.numel());
    for (float v : p.tensor.values()) w.f32(v);
    auto it = st.masks.find(p.name);
    w.u8(it == st.masks.end() ? 0 : 1);
    if (it != st.masks.end()) w.bytes(it->second);
  }
  w.u32(crc32_of(w.buffer()));
  return std::move(w.buffer());
}

inline ParameterStore<float> checkpoint_from_bytes(std::span<const std::uint8_t> bytes) {
  try {
    if (bytes.size() < 4) throw IoError("checkpoint too short");
    const auto body = bytes.first(bytes.size() - 4);
    detail::ByteReader tail(bytes.last(4));
    if (tail.u32() != crc32_of(body)) throw IoError("checkpoint checksum mismatch");

    detail::ByteReader r(body);
    const auto magic = r.take(4);
    if (!std::equal(magic.begin(), magic.end(), kCheckpointMagic.begin())) {
      throw IoError("not a checkpoint (bad magic)");
    }
    if (r.u8() != kCheckpointVersion) throw IoError("unsupported checkpoint version");
    const auto text_bytes = r.take(r.u32());
    const auto cfg = model_config_from_text(std::string(text_bytes.begin(), text_bytes.end()));
    auto st = allocate_store<float>(cfg);
    auto params = st.named();
    if (r.u16() != params.size()) throw IoError("checkpoint tensor count does not match its config");
    for (auto& p : params) {
      const auto name = r.take(r.u8());
      if (std::string(name.begin(), name.end()) != p.name) {
        throw IoError("checkpoint tensor order differs at '" + p.name + "'");
      }
      if (r.u64() != p.tensor.numel()) throw IoError("checkpoint extent mismatch for " + p.name);
      for (auto& v : p.tensor.values()) v = r.f32();
      if (r.u8()) {
        const auto m = r.take(p.tensor.numel());
        st.masks[p.name] = Mask(m.begin(), m.end());
      }
    }
    if (r.remaining() != 0) throw IoError("trailing bytes in checkpoint");
    return st;
  } catch (const BitstreamError& e) {
    throw IoError(std::string("corrupt checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("corrupt checkpoint config: ") + e.what());
  }
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline void save_checkpoint(const ParameterStore<float>& st, const std::filesystem::path& path) {
  write_file_bytes(path, checkpoint_bytes(st));
}

inline ParameterStore<float> load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_bytes(read_file_bytes(path));
}

}  // namespace srnerv
