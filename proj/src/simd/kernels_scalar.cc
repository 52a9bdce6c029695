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

#include "qjump/simd/kernels.h"

namespace qjump::simd::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

void lagged_products(std::span<const double> a, std::span<const double> b,
                     std::span<const std::int64_t> lags, std::span<double> out) {
    const auto n = static_cast<std::int64_t>(a.size());
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const std::int64_t lag = lags[k];
        const std::int64_t begin = lag < 0 ? -lag : 0;
        const std::int64_t end = lag < 0 ? n : n - lag;
        double acc = 0.0;
        for (std::int64_t t = begin; t < end; ++t) {
            acc += a[t] * b[t + lag];
        }
        out[k] = acc;
    }
}

void project_iq(std::span<const float> iq, double axis_i, double axis_q,
                std::span<double> out) {
    for (std::size_t t = 0; t < out.size(); ++t) {
        const double x = static_cast<double>(iq[2 * t]) * axis_i;
        const double y = static_cast<double>(iq[2 * t + 1]) * axis_q;
        out[t] = x + y;
    }
}

double sum(std::span<const double> a) {
    double acc = 0.0;
    for (double v : a) {
        acc += v;
    }
    return acc;
}

}  // namespace qjump::simd::scalar
