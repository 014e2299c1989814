// Copyright 2026 The kcbs-rng Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kcbs {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
  public:
    using Error::Error;
};

/// A density operator that is not Hermitian, not unit-trace or not PSD.
class InvalidState : public Error {
  public:
    using Error::Error;
};

/// Distribution with a zero-weight context used where every context needs
/// positive weight.
class InvalidDistribution : public Error {
  public:
    using Error::Error;
};

class OutOfRange : public Error {
  public:
    using Error::Error;
};

class NumericalFailure : public Error {
  public:
    using Error::Error;
};

/// Malformed input file; `line()` is 1-based, 0 when not line-specific.
class ParseError : public Error {
  public:
    ParseError(const std::string &what, std::size_t line)
        : Error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"),
          line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

} // namespace kcbs
