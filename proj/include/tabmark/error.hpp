// Copyright 2026 The tabmark Authors
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

namespace tabmark {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV input, or a cell that does not fit its declared kind.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// File system failures. The message always carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or a configuration inconsistent with the data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampler gave up.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Detection could not reach a verdict (schema mismatch, empty sample, ...).
class DetectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace tabmark
