/*
 * Copyright 2026 The draftnmt Authors.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace draftnmt {

/// Coarse classification of every failure the library reports. The CLI prints
/// the class name as the first field of its single-line error message.
enum class ErrorClass {
  kShape,
  kRange,
  kEmptyInput,
  kConfig,
  kIo,
  kParse,
  kVocabulary,
  kDivergence,
  kCheckpoint,
  kUsage,
};

constexpr std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::kShape: return "shape_error";
    case ErrorClass::kRange: return "range_error";
    case ErrorClass::kEmptyInput: return "empty_input";
    case ErrorClass::kConfig: return "config_error";
    case ErrorClass::kIo: return "io_error";
    case ErrorClass::kParse: return "parse_error";
    case ErrorClass::kVocabulary: return "vocabulary_mismatch";
    case ErrorClass::kDivergence: return "divergence";
    case ErrorClass::kCheckpoint: return "checkpoint_error";
    case ErrorClass::kUsage: return "usage_error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorClass error_class, const std::string& message)
      : std::runtime_error(message), error_class_(error_class) {}

  ErrorClass error_class() const noexcept { return error_class_; }

 private:
  ErrorClass error_class_;
};

}  // namespace draftnmt
