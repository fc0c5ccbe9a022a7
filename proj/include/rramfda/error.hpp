/*
 * Copyright 2026 The rramfda Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RRAMFDA_ERROR_HPP_
#define RRAMFDA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace rramfda {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kInvalidArgument = 1,
  kIo = 2,
  kData = 3,
  kNumeric = 4,
  kSchema = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

inline Error InvalidArgument(const std::string& what) {
  return Error(ErrorKind::kInvalidArgument, what);
}
inline Error IoError(const std::string& what) { return Error(ErrorKind::kIo, what); }
inline Error DataError(const std::string& what) { return Error(ErrorKind::kData, what); }
inline Error NumericError(const std::string& what) {
  return Error(ErrorKind::kNumeric, what);
}
inline Error SchemaError(const std::string& what) {
  return Error(ErrorKind::kSchema, what);
}

}  // namespace rramfda

#endif  // RRAMFDA_ERROR_HPP_
