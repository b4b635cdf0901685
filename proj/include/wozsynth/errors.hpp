// errors.hpp
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

namespace wozsynth {

// Broad failure classes. The CLI maps each class onto a distinct exit code.
enum class ErrorKind {
  kConfig,
  kData,
  kBackend,
  kShortfall,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed input document (schema file, corpus file, template file...).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

// Input parsed but violates an invariant (duplicate slot, unknown domain...).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

// Shared-slot constraints admit no joint KB assignment.
class UnsatisfiableError : public Error {
 public:
  explicit UnsatisfiableError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

// Transport-level failure talking to a backend. Callers may retry.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, bool retryable)
      : Error(ErrorKind::kBackend, what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

// Backend answered, but the answer breaks the wire contract.
class ProtocolError : public BackendError {
 public:
  explicit ProtocolError(const std::string& what) : BackendError(what, false) {}
};

// Generated dialogue text does not follow the role-marker grammar.
class MalformedGenerationError : public Error {
 public:
  MalformedGenerationError(const std::string& what, std::string raw_text)
      : Error(ErrorKind::kData, what), raw_text_(std::move(raw_text)) {}
  const std::string& raw_text() const { return raw_text_; }

 private:
  std::string raw_text_;
};

class ShortfallError : public Error {
 public:
  ShortfallError(const std::string& what, std::size_t missing)
      : Error(ErrorKind::kShortfall, what), missing_(missing) {}
  std::size_t missing() const { return missing_; }

 private:
  std::size_t missing_;
};

}  // namespace wozsynth
