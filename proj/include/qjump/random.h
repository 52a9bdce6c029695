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

#ifndef QJUMP_RANDOM_H_
#define QJUMP_RANDOM_H_

#include <cstdint>
#include <random>

namespace qjump {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based seed split: the seed for item `index` of stream `stream`
/// depends only on (master, stream, index), so any item can be regenerated
/// in isolation and work can be distributed across threads in any order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) {
    return mix64(mix64(master ^ mix64(stream)) + index);
}

// Stream identifiers used by the pipeline.
namespace streams {
inline constexpr std::uint64_t kTrajectory = 1;
inline constexpr std::uint64_t kReadout = 2;
inline constexpr std::uint64_t kCalibration = 3;
inline constexpr std::uint64_t kHistogram = 4;
}  // namespace streams

}  // namespace qjump

#endif
