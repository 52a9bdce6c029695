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

#include <atomic>
#include <cstdlib>

#include "qjump/error.h"
#include "qjump/simd/kernels.h"

namespace qjump::simd {
namespace {

bool cpu_has_avx2() {
#if defined(QJUMP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (std::getenv("QJUMP_FORCE_SCALAR") != nullptr) {
        return Isa::kScalar;
    }
    return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa> &current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

const char *isa_name(Isa isa) {
    switch (isa) {
        case Isa::kScalar:
            return "scalar";
        case Isa::kAvx2:
            return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    return isa == Isa::kScalar || (isa == Isa::kAvx2 && cpu_has_avx2());
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        fail(ErrorCode::kInvalidInput, std::string("instruction set not supported: ") + isa_name(isa));
    }
    current().store(isa, std::memory_order_relaxed);
}

#if defined(QJUMP_HAVE_AVX2)
#define QJUMP_DISPATCH(fn, ...)                 \
    if (active_isa() == Isa::kAvx2) {           \
        return avx2::fn(__VA_ARGS__);           \
    }                                           \
    return scalar::fn(__VA_ARGS__)
#else
#define QJUMP_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) { QJUMP_DISPATCH(dot, a, b); }

void lagged_products(std::span<const double> a, std::span<const double> b,
                     std::span<const std::int64_t> lags, std::span<double> out) {
    QJUMP_DISPATCH(lagged_products, a, b, lags, out);
}

void project_iq(std::span<const float> iq, double axis_i, double axis_q,
                std::span<double> out) {
    QJUMP_DISPATCH(project_iq, iq, axis_i, axis_q, out);
}

double sum(std::span<const double> a) { QJUMP_DISPATCH(sum, a); }

#undef QJUMP_DISPATCH

}  // namespace qjump::simd
