// Copyright 2026 The SVLB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace svlb {

// Base of every error this library throws. Callers that only need to report
// a diagnostic can catch this; tests usually check the concrete kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that cannot be combined by the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated (bad ratio, non-scalar loss, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed text input: model names, detection files, config JSON.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be processed (image too small, overcrowded scene).
class InputError : public Error {
 public:
  using Error::Error;
};

// Checkpoint or raster file rejected by the reader. `field` names the part
// of the file that failed validation (magic, version, crc, payload, ...).
class LoadError : public Error {
 public:
  LoadError(std::string field, const std::string& what)
      : Error("load error [" + field + "]: " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A valid configuration this component does not handle (e.g. adapting a
// backbone whose depth has no attention schedule).
class UnsupportedConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace svlb
