// Copyright 2026 The lecsettle Authors
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

namespace lec {

/// Invalid input data: negative or non-finite energy, duplicate rows,
/// malformed files. The message names the offending unit/row/file.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Series that do not share the same start, resolution and length, or
/// timestamps that are not evenly spaced.
class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid or unknown configuration keys and values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called with arguments that violate its contract
/// (wrong ledger mode, empty price range, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A billing invariant (energy balance, community balance) failed at runtime.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace lec
