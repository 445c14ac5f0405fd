// Copyright 2026 The mlpa Authors.
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

#include <stdexcept>
#include <string>

namespace mlpa {

// Domain violations are reported with std::domain_error. Numerical
// breakdowns (quadrature that does not converge, rejection loops that hit
// their cap) use NumericError so callers can tell the two apart.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

[[noreturn]] inline void domain_fail(const std::string& where,
                                     const std::string& why) {
  throw std::domain_error(where + ": " + why);
}

inline void require(bool ok, const char* where, const std::string& why) {
  if (!ok) domain_fail(where, why);
}

}  // namespace detail
}  // namespace mlpa
