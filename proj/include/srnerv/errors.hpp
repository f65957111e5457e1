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

#include <stdexcept>
#include <string>

namespace srnerv {

// Process exit codes used by the command-line tool. Every error class below
// maps onto exactly one of them.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kBitstream = 3,
  kDivergence = 4,
  kIo = 5,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

// Tensor extents that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

// Invalid configuration, bad arguments, unusable parameter values.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

// Misuse of the autodiff graph (non-scalar loss, consumed graph).
class GraphError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

class TrainingDivergence : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kDivergence; }
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kIo; }
};

class MissingFrameError : public IoError {
 public:
  MissingFrameError(const std::string& what, long index)
      : IoError(what), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

class DimensionError : public IoError {
 public:
  using IoError::IoError;
};

class SidecarError : public IoError {
 public:
  using IoError::IoError;
};

enum class BitstreamErrorKind {
  kBadMagic,
  kUnsupportedVersion,
  kChecksumMismatch,
  kTruncated,
  kMalformed,
};

inline const char* to_string(BitstreamErrorKind kind) {
  switch (kind) {
    case BitstreamErrorKind::kBadMagic: return "bad magic";
    case BitstreamErrorKind::kUnsupportedVersion: return "unsupported version";
    case BitstreamErrorKind::kChecksumMismatch: return "checksum mismatch";
    case BitstreamErrorKind::kTruncated: return "truncated stream";
    case BitstreamErrorKind::kMalformed: return "malformed stream";
  }
  return "unknown";
}

class BitstreamError : public Error {
 public:
  BitstreamError(BitstreamErrorKind kind, const std::string& detail)
      : Error(std::string(to_string(kind)) +
              (detail.empty() ? "" : ": " + detail)),
        kind_(kind) {}
  BitstreamErrorKind kind() const noexcept { return kind_; }
  ExitCode exit_code() const noexcept override { return ExitCode::kBitstream; }

 private:
  BitstreamErrorKind kind_;
};

}  // namespace srnerv
