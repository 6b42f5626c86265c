// src/error.cc

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

#include "arcall/error.h"

namespace arcall {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedWav: return "MalformedWav";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kAudioTooShort: return "AudioTooShort";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kCompositionError: return "CompositionError";
    case ErrorCode::kUnknownPhoneme: return "UnknownPhoneme";
    case ErrorCode::kNoValidPath: return "NoValidPath";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptyLexicon: return "EmptyLexicon";
    case ErrorCode::kModelFormat: return "ModelFormat";
    case ErrorCode::kUnvocalizedConsonant: return "UnvocalizedConsonant";
    case ErrorCode::kUnknownCharacter: return "UnknownCharacter";
    case ErrorCode::kUnknownPhonemeSymbol: return "UnknownPhonemeSymbol";
    case ErrorCode::kDuplicateVariant: return "DuplicateVariant";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace arcall
