// Copyright 2026 The Lewis Authors. All Rights Reserved.
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

#ifndef LEWIS_ERRORS_HPP_
#define LEWIS_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lewis {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LEWIS_DEFINE_ERROR(Name)           \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

LEWIS_DEFINE_ERROR(EmptyInput);
LEWIS_DEFINE_ERROR(EmptyCorpus);
LEWIS_DEFINE_ERROR(IoError);
LEWIS_DEFINE_ERROR(InvalidScript);
LEWIS_DEFINE_ERROR(TagMismatch);
LEWIS_DEFINE_ERROR(FillMismatch);
LEWIS_DEFINE_ERROR(LengthError);
LEWIS_DEFINE_ERROR(VocabMismatch);
LEWIS_DEFINE_ERROR(FormatError);
LEWIS_DEFINE_ERROR(DegenerateData);
LEWIS_DEFINE_ERROR(ConstraintFailure);
LEWIS_DEFINE_ERROR(ShapeError);
LEWIS_DEFINE_ERROR(HashMismatch);

#undef LEWIS_DEFINE_ERROR

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// Config schema violation; key_path is dotted, e.g. "models.tagger.layers".
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key_path, const std::string& what)
      : Error(key_path + ": " + what), key_path_(key_path) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

// A pipeline stage was run before the stage producing one of its inputs.
class StageDependencyError : public Error {
 public:
  explicit StageDependencyError(const std::string& missing)
      : Error("missing upstream artifact: " + missing), missing_(missing) {}
  const std::string& missing() const { return missing_; }

 private:
  std::string missing_;
};

}  // namespace lewis

#endif  // LEWIS_ERRORS_HPP_
