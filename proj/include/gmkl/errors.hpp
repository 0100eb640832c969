// Copyright 2026 The GMKL Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gmkl {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a precondition (dimension mismatch, bad id, bad flag value).
class UsageError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input data. Carries the byte offset of the offending byte when
// one is known.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what, std::int64_t offset = -1)
      : Error(offset < 0 ? what
                         : what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::int64_t offset() const noexcept { return offset_; }

 private:
  std::int64_t offset_;
};

// Model file failed validation (magic, version, truncation, checksum).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite gradient or loss during optimization.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Evaluation could not produce a well-defined score.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmkl
