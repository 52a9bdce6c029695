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

#ifndef QJUMP_ERROR_H_
#define QJUMP_ERROR_H_

#include <stdexcept>
#include <string>

namespace qjump {

enum class ErrorCode {
    kInvalidInput,
    kUnderdetermined,
    kTruncationUnsafe,
    kNegativeTemperature,
    kInfeasible,
    kPacking,
    kUnresolvablePeaks,
    kInvalidPeaks,
    kInsufficientStatistics,
    kUndefinedCorrelation,
    kFormat,
    kCorruption,
    kVersion,
    kValidation,
    kDependency,
    kNumerical,
    kIo,
};

const char *error_code_name(ErrorCode code);

/// Exception carrying a machine-readable category.
class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

   private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &message) {
    throw Error(code, message);
}

}  // namespace qjump

#endif
