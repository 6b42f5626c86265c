// arcall/model_io.h

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

/**
   JSON form of an AcousticModel. Log-probabilities of minus infinity are
   written as null.
 */

#ifndef ARCALL_MODEL_IO_H_
#define ARCALL_MODEL_IO_H_

#include <string>
#include <string_view>

#include "arcall/acoustic.h"

namespace arcall {

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const AcousticModel& model);

// Throws kModelFormat on bad JSON, a version or inventory mismatch, or any
// model invariant violation.
AcousticModel model_from_json(std::string_view text);

void save_model(const std::string& path, const AcousticModel& model);
AcousticModel load_model(const std::string& path);

}  // namespace arcall

#endif  // ARCALL_MODEL_IO_H_
