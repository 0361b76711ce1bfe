// Copyright 2026 The dpf Authors
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

#ifndef DPF_ERROR_HPP_
#define DPF_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dpf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operand extents do not conform to an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (log of a negative, x / 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf produced during a computation, or a failed numerical precondition.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File or stream failure, including malformed on-disk formats.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpf

#endif  // DPF_ERROR_HPP_
