// Copyright 2026 The humi Authors
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

#ifndef HUMI_ERROR_H_
#define HUMI_ERROR_H_

#include <stdexcept>
#include <string>

namespace humi {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document. `path` locates the offending field, e.g.
// "joints[3].limits".
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// File system failure (missing file, unwritable directory).
class IoError : public Error {
 public:
  IoError(std::string file, const std::string& message)
      : Error(file + ": " + message), file_(std::move(file)) {}
  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

// Query outside a valid domain (time outside a trajectory, u outside [0,1]).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Bad argument to an operation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Signal without enough variation to locate a correlation peak.
class DegenerateSignalError : public Error {
 public:
  using Error::Error;
};

}  // namespace humi

#endif  // HUMI_ERROR_H_
