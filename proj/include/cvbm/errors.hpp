// Copyright 2026 The CVBM Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file errors.hpp
 * Exception hierarchy shared by every module. Each error carries the name
 * of the module that raised it so the CLI can report where a run failed.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvbm {

class Error : public std::runtime_error {
  public:
    Error(std::string module, const std::string &what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

    [[nodiscard]] const std::string &module() const noexcept { return module_; }

  private:
    std::string module_;
};

/// Bad user-supplied value (configuration, parameter, shape).
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

class IndexError : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

/// Squared norm of a truncated Fock state fell below the configured floor.
class TruncationLeakage : public Error {
  public:
    TruncationLeakage(std::string module, double norm, double floor)
        : Error(std::move(module), "truncation leakage: squared norm " + std::to_string(norm) +
                                       " below floor " + std::to_string(floor)),
          norm_(norm) {}

    [[nodiscard]] double norm() const noexcept { return norm_; }

  private:
    double norm_;
};

class NonGaussianGate : public Error {
  public:
    using Error::Error;
};

/// Covariance block that cannot be factorized; the state has been corrupted.
class CorruptedState : public Error {
  public:
    using Error::Error;
};

class GridMassDeficit : public Error {
  public:
    using Error::Error;
};

class InsufficientSamples : public Error {
  public:
    using Error::Error;
};

class NonFinite : public Error {
  public:
    NonFinite(std::string module, const std::string &what, std::size_t iteration)
        : Error(std::move(module), what + " at iteration " + std::to_string(iteration)),
          iteration_(iteration) {}

    [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

  private:
    std::size_t iteration_;
};

/// Malformed input file. The message names the path and the offending line.
class FormatError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace cvbm
