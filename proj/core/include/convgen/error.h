// Copyright 2026 The convgen Authors
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

namespace convgen {

/// Broad failure classes. Each maps to one process exit code in the CLI.
enum class ErrorKind {
  kValidation,  // bad configuration or violated precondition (exit 2)
  kBackend,     // completion backend failure (exit 3)
  kData,        // malformed or inconsistent input data (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class BackendError : public Error {
 public:
  BackendError(const std::string& what, bool retriable, int attempts)
      : Error(ErrorKind::kBackend, what),
        retriable_(retriable),
        attempts_(attempts) {}

  /// True for transport failures and 429/5xx statuses.
  bool retriable() const noexcept { return retriable_; }
  /// Number of requests issued before giving up.
  int attempts() const noexcept { return attempts_; }

 private:
  bool retriable_;
  int attempts_;
};

/// Process exit code for an error kind: 2 validation, 3 backend, 4 data.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
      return 2;
    case ErrorKind::kBackend:
      return 3;
    case ErrorKind::kData:
      return 4;
  }
  return 1;
}

}  // namespace convgen
