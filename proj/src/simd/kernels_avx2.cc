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

// Built with -mavx2 -mfma; only reached through the runtime dispatcher.

#include <immintrin.h>

#include "qjump/simd/kernels.h"

namespace qjump::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_ptr(const double *a, const double *b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        tail += a[i] * b[i];
    }
    acc0 = _mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3));
    return hsum(acc0) + tail;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    return dot_ptr(a.data(), b.data(), a.size());
}

void lagged_products(std::span<const double> a, std::span<const double> b,
                     std::span<const std::int64_t> lags, std::span<double> out) {
    const auto n = static_cast<std::int64_t>(a.size());
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const std::int64_t lag = lags[k];
        if (lag >= 0) {
            out[k] = dot_ptr(a.data(), b.data() + lag, static_cast<std::size_t>(n - lag));
        } else {
            out[k] = dot_ptr(a.data() - lag, b.data(), static_cast<std::size_t>(n + lag));
        }
    }
}

void project_iq(std::span<const float> iq, double axis_i, double axis_q,
                std::span<double> out) {
    const std::size_t n = out.size();
    const __m256d axis = _mm256_setr_pd(axis_i, axis_q, axis_i, axis_q);
    std::size_t t = 0;
    for (; t + 4 <= n; t += 4) {
        // (I0 Q0 I1 Q1) and (I2 Q2 I3 Q3) widened to double.
        const __m256d p01 = _mm256_cvtps_pd(_mm_loadu_ps(iq.data() + 2 * t));
        const __m256d p23 = _mm256_cvtps_pd(_mm_loadu_ps(iq.data() + 2 * t + 4));
        const __m256d m01 = _mm256_mul_pd(p01, axis);
        const __m256d m23 = _mm256_mul_pd(p23, axis);
        // hadd yields (x0 x2 x1 x3); restore sample order.
        const __m256d h = _mm256_hadd_pd(m01, m23);
        _mm256_storeu_pd(out.data() + t, _mm256_permute4x64_pd(h, 0xD8));
    }
    for (; t < n; ++t) {
        const double x = static_cast<double>(iq[2 * t]) * axis_i;
        const double y = static_cast<double>(iq[2 * t + 1]) * axis_q;
        out[t] = x + y;
    }
}

double sum(std::span<const double> a) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n = a.size();
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a.data() + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a.data() + i + 4));
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        tail += a[i];
    }
    return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

}  // namespace qjump::simd::avx2
