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
#include <numeric>

#include "qjump/error.h"
#include "qjump/numerics.h"

namespace qjump {

SymmetricMatrix::SymmetricMatrix(std::size_t dimension)
    : dimension_(dimension), entries_(dimension * dimension, 0.0) {
    if (dimension == 0) {
        fail(ErrorCode::kInvalidInput, "matrix dimension must be positive");
    }
}

SymmetricMatrix::SymmetricMatrix(std::size_t dimension, std::vector<double> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
    if (dimension == 0) {
        fail(ErrorCode::kInvalidInput, "matrix dimension must be positive");
    }
    if (entries_.size() != dimension * dimension) {
        fail(ErrorCode::kInvalidInput, "matrix entry count does not match dimension");
    }
    for (std::size_t i = 0; i < dimension; ++i) {
        for (std::size_t j = i + 1; j < dimension; ++j) {
            if (entries_[i * dimension + j] != entries_[j * dimension + i]) {
                fail(ErrorCode::kInvalidInput, "matrix is not symmetric");
            }
        }
    }
}

void SymmetricMatrix::add_to_diagonal(double value) {
    for (std::size_t i = 0; i < dimension_; ++i) {
        entries_[i * dimension_ + i] += value;
    }
}

double SymmetricMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : entries_) {
        s += v * v;
    }
    return std::sqrt(s);
}

namespace {

// Working state for the Householder + QL pipeline. `v` starts as the input
// matrix and ends as the accumulated orthogonal transform.
struct Workspace {
    std::size_t n;
    std::vector<double> v;
    std::vector<double> d;
    std::vector<double> e;

    double &at(std::size_t i, std::size_t j) { return v[i * n + j]; }
};

void tridiagonalize(Workspace &w) {
    const std::size_t n = w.n;
    auto &d = w.d;
    auto &e = w.e;
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = w.at(n - 1, j);
    }
    for (std::size_t i = n - 1; i > 0; --i) {
        double scale = 0.0;
        double h = 0.0;
        for (std::size_t k = 0; k < i; ++k) {
            scale += std::abs(d[k]);
        }
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = w.at(i - 1, j);
                w.at(i, j) = 0.0;
                w.at(j, i) = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] = 0.0;
            }
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                w.at(j, i) = f;
                g = e[j] + w.at(j, j) * f;
                for (std::size_t k = j + 1; k + 1 <= i; ++k) {
                    g += w.at(k, j) * d[k];
                    e[k] += w.at(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; ++j) {
                e[j] -= hh * d[j];
            }
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (std::size_t k = j; k + 1 <= i; ++k) {
                    w.at(k, j) -= (f * e[k] + g * d[k]);
                }
                d[j] = w.at(i - 1, j);
                w.at(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the Householder reflections.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        w.at(n - 1, i) = w.at(i, i);
        w.at(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; ++k) {
                d[k] = w.at(k, i + 1) / h;
            }
            for (std::size_t j = 0; j <= i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k <= i; ++k) {
                    g += w.at(k, i + 1) * w.at(k, j);
                }
                for (std::size_t k = 0; k <= i; ++k) {
                    w.at(k, j) -= g * d[k];
                }
            }
        }
        for (std::size_t k = 0; k <= i; ++k) {
            w.at(k, i + 1) = 0.0;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = w.at(n - 1, j);
        w.at(n - 1, j) = 0.0;
    }
    w.at(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

void ql_implicit(Workspace &w, bool accumulate) {
    const std::size_t n = w.n;
    auto &d = w.d;
    auto &e = w.e;
    for (std::size_t i = 1; i < n; ++i) {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    constexpr int kMaxSweeps = 60;
    const double eps = std::ldexp(1.0, -52);
    double f = 0.0;
    double tst1 = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) {
                break;
            }
            ++m;
        }
        if (m > l) {
            int sweeps = 0;
            do {
                if (++sweeps > kMaxSweeps) {
                    fail(ErrorCode::kNumerical, "QL iteration did not converge");
                }
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) {
                    d[i] -= h;
                }
                f += h;

                p = d[m];
                double c = 1.0;
                double c2 = c;
                double c3 = c;
                const double el1 = e[l + 1];
                double s = 0.0;
                double s2 = 0.0;
                for (std::size_t ii = m; ii-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[ii];
                    h = c * p;
                    r = std::hypot(p, e[ii]);
                    e[ii + 1] = s * r;
                    s = e[ii] / r;
                    c = p / r;
                    p = c * d[ii] - s * g;
                    d[ii + 1] = h + s * (c * g + s * d[ii]);
                    if (accumulate) {
                        for (std::size_t k = 0; k < n; ++k) {
                            h = w.at(k, ii + 1);
                            w.at(k, ii + 1) = s * w.at(k, ii) + c * h;
                            w.at(k, ii) = c * w.at(k, ii) - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

Workspace decompose(const SymmetricMatrix &m, bool accumulate) {
    const std::size_t n = m.dimension();
    for (double x : m.entries()) {
        if (!std::isfinite(x)) {
            fail(ErrorCode::kInvalidInput, "matrix has non-finite entries");
        }
    }
    Workspace w{n, std::vector<double>(m.entries().begin(), m.entries().end()),
                std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    if (n == 1) {
        w.d[0] = m(0, 0);
        w.v[0] = 1.0;
        return w;
    }
    tridiagonalize(w);
    ql_implicit(w, accumulate);
    return w;
}

}  // namespace

EigenDecomposition symmetric_eigensolve(const SymmetricMatrix &m) {
    Workspace w = decompose(m, true);
    const std::size_t n = w.n;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return w.d[a] < w.d[b]; });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.eigenvalues[k] = w.d[src];
        std::size_t pivot = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::abs(w.at(i, src));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        const double sign = w.at(pivot, src) < 0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            out.eigenvectors[i * n + k] = sign * w.at(i, src);
        }
    }
    return out;
}

std::vector<double> symmetric_eigenvalues(const SymmetricMatrix &m) {
    Workspace w = decompose(m, false);
    std::sort(w.d.begin(), w.d.end());
    return std::move(w.d);
}

}  // namespace qjump
