/*
 * Copyright 2026 The dngd Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace dngd {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  numerical_failure,
  memory_budget,
  config,
  io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure inside the core surfaces as this type; the C API maps the
// code onto a status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Error(ErrorCode code, const std::string& message, std::size_t class_index,
        std::size_t point_index)
      : std::runtime_error(message + " (class " + std::to_string(class_index) +
                           ", point " + std::to_string(point_index) + ")"),
        code_(code),
        class_index_(class_index),
        point_index_(point_index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> class_index() const noexcept { return class_index_; }
  std::optional<std::size_t> point_index() const noexcept { return point_index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> class_index_;
  std::optional<std::size_t> point_index_;
};

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) throw Error(code, message);
}
inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace dngd
