// Copyright 2026 The bhc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BHC_ERROR_HPP
#define BHC_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bhc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Basis or dense-matrix dimension above the configured cap.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t dimension, std::size_t cap)
      : Error(what + " (dimension " + std::to_string(dimension) + " exceeds cap " +
              std::to_string(cap) + ")"),
        dimension_(dimension),
        cap_(cap) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t dimension_;
  std::size_t cap_;
};

class StaleStateError : public Error {
 public:
  using Error::Error;
};

// Integrator failure: step underflow, tolerance failure or conservation-law
// violation. Carries the protocol angle at which it happened.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double theta)
      : Error(what + " at theta=" + std::to_string(theta)), theta_(theta) {}

  double theta() const { return theta_; }

 private:
  double theta_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double theta)
      : Error(what + " at theta=" + std::to_string(theta)), theta_(theta) {}

  double theta() const { return theta_; }

 private:
  double theta_;
};

class BranchLossError : public Error {
 public:
  BranchLossError(const std::string& what, double theta)
      : Error(what + " at theta=" + std::to_string(theta)), theta_(theta) {}

  double theta() const { return theta_; }

 private:
  double theta_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class StatisticsError : public Error {
 public:
  using Error::Error;
};

class PartialRunError : public Error {
 public:
  using Error::Error;
};

}  // namespace bhc

#endif  // BHC_ERROR_HPP
