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

#ifndef QJUMP_SIMD_KERNELS_H_
#define QJUMP_SIMD_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <span>

namespace qjump::simd {

/// Instruction set used by the dispatched kernels.
enum class Isa { kScalar, kAvx2 };

const char *isa_name(Isa isa);

/// True when `isa` was compiled in and the running CPU supports it.
bool isa_supported(Isa isa);

/// The instruction set selected at startup: the widest supported one, unless
/// the QJUMP_FORCE_SCALAR environment variable is set.
Isa active_isa();

/// Overrides the dispatch target (tests and benchmarks). Throws if unsupported.
void set_active_isa(Isa isa);

// Every kernel has a scalar reference in namespace `scalar` and, where the
// platform allows, a vector variant with an identical signature. When every
// input is an integer-valued double and partial sums stay below 2^53, all
// variants return bit-identical results regardless of summation order.

/// Sum over i of a[i] * b[i]. Spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b);

/// out[k] = sum over t of a[t] * b[t + lags[k]] for all t with both indices
/// inside [0, n). a and b must have equal length n; |lags[k]| < n.
void lagged_products(std::span<const double> a, std::span<const double> b,
                     std::span<const std::int64_t> lags, std::span<double> out);

/// out[t] = iq[2t] * axis_i + iq[2t+1] * axis_q, evaluated in double.
/// `iq` holds interleaved (I, Q) pairs.
void project_iq(std::span<const float> iq, double axis_i, double axis_q,
                std::span<double> out);

/// Sum of all entries.
double sum(std::span<const double> a);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void lagged_products(std::span<const double> a, std::span<const double> b,
                     std::span<const std::int64_t> lags, std::span<double> out);
void project_iq(std::span<const float> iq, double axis_i, double axis_q,
                std::span<double> out);
double sum(std::span<const double> a);
}  // namespace scalar

#if defined(QJUMP_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void lagged_products(std::span<const double> a, std::span<const double> b,
                     std::span<const std::int64_t> lags, std::span<double> out);
void project_iq(std::span<const float> iq, double axis_i, double axis_q,
                std::span<double> out);
double sum(std::span<const double> a);
}  // namespace avx2
#endif

}  // namespace qjump::simd

#endif
