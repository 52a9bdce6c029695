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

#include <algorithm>
#include <cmath>
#include <vector>

#include "qjump/error.h"
#include "qjump/numerics.h"

namespace qjump {

ExponentialFit fit_exponential(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        fail(ErrorCode::kInvalidInput, "x and y lengths differ");
    }
    if (x.size() < 3) {
        fail(ErrorCode::kInvalidInput, "exponential fit needs at least 3 points");
    }
    std::vector<double> ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
            fail(ErrorCode::kInvalidInput, "exponential fit input is not finite");
        }
        ax[i] = std::abs(x[i]);
    }
    std::vector<double> sorted = ax;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.size() < 2) {
        fail(ErrorCode::kInvalidInput, "exponential fit needs two distinct |x| values");
    }
    double min_gap = sorted.back() - sorted.front();
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        min_gap = std::min(min_gap, sorted[i] - sorted[i - 1]);
    }
    const double tau_lo = 0.1 * min_gap;
    const double tau_hi = 100.0 * sorted.back();

    ExponentialFit out;
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
        out.fit.parameters = {0.0, std::numeric_limits<double>::quiet_NaN()};
        out.fit.standard_errors = {0.0, std::numeric_limits<double>::quiet_NaN()};
        out.fit.converged = true;
        out.amplitude_error = 0.0;
        return out;
    }

    // Profile over tau with the amplitude solved linearly, then refine both.
    constexpr int kGrid = 80;
    double best_tau = tau_lo;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int g = 0; g < kGrid; ++g) {
        const double tau = tau_lo * std::pow(tau_hi / tau_lo, g / double(kGrid - 1));
        double sey = 0.0;
        double see = 0.0;
        for (std::size_t i = 0; i < ax.size(); ++i) {
            const double e = std::exp(-ax[i] / tau);
            sey += e * y[i];
            see += e * e;
        }
        const double amp = see > 0 ? sey / see : 0.0;
        double cost = 0.0;
        for (std::size_t i = 0; i < ax.size(); ++i) {
            const double r = amp * std::exp(-ax[i] / tau) - y[i];
            cost += r * r;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best_tau = tau;
        }
    }
    double sey = 0.0;
    double see = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
        const double e = std::exp(-ax[i] / best_tau);
        sey += e * y[i];
        see += e * e;
    }
    const double amp0 = see > 0 ? sey / see : 0.0;

    auto residuals = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < ax.size(); ++i) {
            r[i] = p[0] * std::exp(-ax[i] / p[1]) - y[i];
        }
    };
    const double initial[2] = {amp0, best_tau};
    const Bounds bounds[2] = {Bounds{}, Bounds{tau_lo, tau_hi}};
    out.fit = least_squares(residuals, ax.size(), initial, bounds);
    out.amplitude = out.fit.parameters[0];
    out.decay_time = out.fit.parameters[1];
    out.decay_time_determined = out.amplitude != 0.0;
    out.amplitude_error = out.fit.standard_errors[0];
    out.decay_time_error = out.fit.standard_errors[1];
    return out;
}

}  // namespace qjump
