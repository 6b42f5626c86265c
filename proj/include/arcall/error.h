// arcall/error.h

// Copyright 2026  The arcall Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ARCALL_ERROR_H_
#define ARCALL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace arcall {

enum class ErrorCode {
  kInvalidArgument,
  // audio
  kMalformedWav,
  kUnsupportedFormat,
  kAudioTooShort,
  // acoustic / decoder
  kDimensionMismatch,
  kEmptyInput,
  kCompositionError,
  kUnknownPhoneme,
  kNoValidPath,
  kEmptyCorpus,
  kEmptyLexicon,
  kModelFormat,
  // lexicon
  kUnvocalizedConsonant,
  kUnknownCharacter,
  kUnknownPhonemeSymbol,
  kDuplicateVariant,
  // eval
  kEmptyReference,
  // storage
  kNotFound,
  kConflict,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported by throwing arcall::Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace arcall

#endif  // ARCALL_ERROR_H_
