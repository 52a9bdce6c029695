// Copyright 2026 The qjump Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qjump/error.h"

namespace qjump {

const char *error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidInput: return "invalid-input";
        case ErrorCode::kUnderdetermined: return "underdetermined";
        case ErrorCode::kTruncationUnsafe: return "truncation-unsafe";
        case ErrorCode::kNegativeTemperature: return "negative-temperature";
        case ErrorCode::kInfeasible: return "infeasible";
        case ErrorCode::kPacking: return "packing";
        case ErrorCode::kUnresolvablePeaks: return "unresolvable-peaks";
        case ErrorCode::kInvalidPeaks: return "invalid-peaks";
        case ErrorCode::kInsufficientStatistics: return "insufficient-statistics";
        case ErrorCode::kUndefinedCorrelation: return "undefined-correlation";
        case ErrorCode::kFormat: return "format";
        case ErrorCode::kCorruption: return "corruption";
        case ErrorCode::kVersion: return "version";
        case ErrorCode::kValidation: return "validation";
        case ErrorCode::kDependency: return "dependency";
        case ErrorCode::kNumerical: return "numerical";
        case ErrorCode::kIo: return "io";
    }
    return "unknown";
}

}  // namespace qjump
