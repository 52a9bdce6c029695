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

#include "qjump/error.h"
#include "qjump/numerics.h"

namespace qjump {

std::optional<std::vector<double>> solve_linear_system(std::vector<double> a,
                                                       std::vector<double> b) {
    const std::size_t n = b.size();
    double scale = 0.0;
    for (double v : a) {
        scale = std::max(scale, std::abs(v));
    }
    if (scale == 0.0) {
        return std::nullopt;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot * n + col]) <= 1e-14 * scale) {
            return std::nullopt;
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a[col * n + c], a[pivot * n + c]);
            }
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a[r * n + col] / a[col * n + col];
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < n; ++c) {
                a[r * n + c] -= factor * a[col * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) {
            acc -= a[i * n + c] * x[c];
        }
        x[i] = acc / a[i * n + i];
    }
    return x;
}

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

Bounds bound_for(std::span<const Bounds> bounds, std::size_t i) {
    return bounds.empty() ? Bounds{} : bounds[i];
}

// Column-major m x n Jacobian by central differences, falling back to a
// one-sided difference where a bound blocks one side.
void jacobian(const ResidualFunction &f, std::span<const double> p, std::span<const Bounds> bounds,
              std::size_t m, std::vector<double> &jac) {
    const std::size_t n = p.size();
    std::vector<double> probe(p.begin(), p.end());
    std::vector<double> plus(m);
    std::vector<double> minus(m);
    for (std::size_t j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(std::abs(p[j]), 1.0);
        const Bounds b = bound_for(bounds, j);
        double hi = p[j] + h;
        double lo = p[j] - h;
        if (hi > b.upper) {
            hi = p[j];
        }
        if (lo < b.lower) {
            lo = p[j];
        }
        probe[j] = hi;
        f(probe, plus);
        probe[j] = lo;
        f(probe, minus);
        probe[j] = p[j];
        const double span = hi - lo;
        for (std::size_t i = 0; i < m; ++i) {
            jac[j * m + i] = span > 0 ? (plus[i] - minus[i]) / span : 0.0;
        }
    }
}

}  // namespace

FitResult least_squares(const ResidualFunction &residuals, std::size_t m,
                        std::span<const double> initial, std::span<const Bounds> bounds,
                        const FitOptions &options) {
    const std::size_t n = initial.size();
    if (n == 0) {
        fail(ErrorCode::kInvalidInput, "no parameters to fit");
    }
    if (m < n) {
        fail(ErrorCode::kUnderdetermined, "fewer data points than parameters");
    }
    if (!bounds.empty() && bounds.size() != n) {
        fail(ErrorCode::kInvalidInput, "bounds must match parameter count");
    }
    for (std::size_t j = 0; j < n; ++j) {
        const Bounds b = bound_for(bounds, j);
        if (!(initial[j] >= b.lower && initial[j] <= b.upper)) {
            fail(ErrorCode::kInvalidInput, "initial parameters violate bounds");
        }
    }

    std::vector<double> p(initial.begin(), initial.end());
    std::vector<double> r(m);
    residuals(p, r);
    double cost = norm2(r);
    if (!std::isfinite(cost)) {
        fail(ErrorCode::kNumerical, "residuals non-finite at initial parameters");
    }

    FitResult result;
    std::vector<double> jac(m * n);
    std::vector<double> jtj(n * n);
    std::vector<double> jtr(n);
    std::vector<double> trial(n);
    std::vector<double> r_trial(m);
    double lambda = 1e-3;

    int iter = 0;
    while (iter < options.max_iterations && cost > 0.0) {
        ++iter;
        jacobian(residuals, p, bounds, m, jac);
        for (std::size_t a = 0; a < n; ++a) {
            double g = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                g += jac[a * m + i] * r[i];
            }
            jtr[a] = g;
            for (std::size_t b = a; b < n; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    s += jac[a * m + i] * jac[b * m + i];
                }
                jtj[a * n + b] = s;
                jtj[b * n + a] = s;
            }
        }

        bool accepted = false;
        bool stalled = false;
        double step_norm = 0.0;
        double new_cost = cost;
        while (!accepted) {
            std::vector<double> lhs = jtj;
            for (std::size_t a = 0; a < n; ++a) {
                lhs[a * n + a] += lambda * std::max(jtj[a * n + a], 1e-30);
            }
            std::vector<double> rhs(n);
            for (std::size_t a = 0; a < n; ++a) {
                rhs[a] = -jtr[a];
            }
            auto step = solve_linear_system(std::move(lhs), std::move(rhs));
            if (step) {
                for (std::size_t j = 0; j < n; ++j) {
                    const Bounds b = bound_for(bounds, j);
                    trial[j] = std::clamp(p[j] + (*step)[j], b.lower, b.upper);
                }
                step_norm = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    step_norm += (trial[j] - p[j]) * (trial[j] - p[j]);
                }
                step_norm = std::sqrt(step_norm);
                residuals(trial, r_trial);
                new_cost = norm2(r_trial);
                if (std::isfinite(new_cost) && new_cost < cost) {
                    accepted = true;
                    break;
                }
                if (step_norm <= options.step_tolerance * (norm2(p) + options.step_tolerance)) {
                    stalled = true;
                    break;
                }
            }
            lambda *= 10.0;
            if (lambda > 1e16) {
                stalled = true;
                break;
            }
        }
        if (stalled) {
            // No descent direction left at working precision.
            result.converged = true;
            break;
        }
        const double rel_change = (cost - new_cost) / cost;
        p = trial;
        r.swap(r_trial);
        cost = new_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        if (rel_change < options.relative_tolerance ||
            step_norm < options.step_tolerance * (norm2(p) + options.step_tolerance) ||
            cost == 0.0) {
            result.converged = true;
            break;
        }
    }
    if (cost == 0.0) {
        result.converged = true;
    }

    result.parameters = p;
    result.residual_norm = cost;
    result.iterations = iter;
    result.standard_errors.assign(n, std::numeric_limits<double>::quiet_NaN());
    if (m > n) {
        jacobian(residuals, p, bounds, m, jac);
        const double s2 = cost * cost / static_cast<double>(m - n);
        std::vector<double> normal(n * n);
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t y = 0; y < n; ++y) {
                double s = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    s += jac[x * m + i] * jac[y * m + i];
                }
                normal[x * n + y] = s;
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<double> e(n, 0.0);
            e[k] = 1.0;
            if (auto col = solve_linear_system(normal, std::move(e))) {
                result.standard_errors[k] = std::sqrt(std::max(0.0, s2 * (*col)[k]));
            }
        }
    }
    return result;
}

FitResult nonlinear_least_squares(const PointModel &model, std::span<const double> x,
                                  std::span<const double> y, std::span<const double> initial,
                                  std::span<const Bounds> bounds, const FitOptions &options) {
    if (x.size() != y.size()) {
        fail(ErrorCode::kInvalidInput, "x and y lengths differ");
    }
    auto f = [&](std::span<const double> p, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = model(p, x[i]) - y[i];
        }
    };
    return least_squares(f, x.size(), initial, bounds, options);
}

}  // namespace qjump
