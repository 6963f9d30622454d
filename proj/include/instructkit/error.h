// Copyright 2026 The Instructkit Authors.
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

#ifndef INSTRUCTKIT_ERROR_H_
#define INSTRUCTKIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace instructkit {

// Base of every error the library throws. The CLI maps ValidationError to
// exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violates a schema or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad or missing configuration (including a missing credential).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& cause)
      : Error(path + ": " + cause), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A chat-completion call failed for good. `status` is the last HTTP status
// seen, or 0 for a transport failure.
class ClientError : public Error {
 public:
  ClientError(const std::string& what, int status)
      : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

}  // namespace instructkit

#endif  // INSTRUCTKIT_ERROR_H_
