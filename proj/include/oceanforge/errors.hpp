// errors.hpp
//
// Copyright 2026 The Oceanforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OCEANFORGE_ERRORS_HPP
#define OCEANFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace oceanforge {

// Common base so callers that only care about "one of ours vs. a genuine
// bug" can catch a single type.
class CodedErrorBase : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every module throws a CodedError carrying its own error-code enum, so tests
// can assert on the exact failure kind instead of matching message strings.
template <typename Code>
class CodedError : public CodedErrorBase {
 public:
  CodedError(Code code, std::string message)
      : CodedErrorBase(std::move(message)), code_(code) {}

  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

}  // namespace oceanforge

#endif  // OCEANFORGE_ERRORS_HPP
