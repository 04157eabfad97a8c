//
// Copyright 2026 The fllab Authors
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
//

#ifndef FLLAB_UTIL_ERROR_H_
#define FLLAB_UTIL_ERROR_H_

#include <stdexcept>
#include <string>

namespace fllab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (shape mismatch, out-of-range
// value, malformed input bytes).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Configuration failed validation. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A numerical computation produced a non-finite value or hit a degenerate
// input (zero variance, singular covariance).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fllab

#endif  // FLLAB_UTIL_ERROR_H_
