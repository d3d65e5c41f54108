// Copyright 2026 The disagg Authors. All Rights Reserved.
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

#ifndef DISAGG_ERROR_HPP_
#define DISAGG_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace disagg {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input files.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Arguments that violate an operation's preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The LinExp exponent left the representable range. Usually means a training
// run diverged.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Optimization aborted (overflow or non-finite loss).
class TrainError : public Error {
 public:
  TrainError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

}  // namespace disagg

#endif  // DISAGG_ERROR_HPP_
