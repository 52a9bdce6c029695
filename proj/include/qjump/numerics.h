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

#ifndef QJUMP_NUMERICS_H_
#define QJUMP_NUMERICS_H_

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace qjump {

/// Dense real symmetric matrix stored row-major. Both triangles are stored
/// and kept exactly equal.
class SymmetricMatrix {
   public:
    explicit SymmetricMatrix(std::size_t dimension);
    /// Throws kInvalidInput if `entries` is not dimension^2 long, not exactly
    /// symmetric, or dimension is 0.
    SymmetricMatrix(std::size_t dimension, std::vector<double> entries);

    std::size_t dimension() const { return dimension_; }
    double operator()(std::size_t row, std::size_t col) const {
        return entries_[row * dimension_ + col];
    }
    /// Writes both (row, col) and (col, row).
    void set(std::size_t row, std::size_t col, double value) {
        entries_[row * dimension_ + col] = value;
        entries_[col * dimension_ + row] = value;
    }
    void add_to_diagonal(double value);
    std::span<const double> entries() const { return entries_; }
    double frobenius_norm() const;

   private:
    std::size_t dimension_;
    std::vector<double> entries_;
};

struct EigenDecomposition {
    /// Ascending.
    std::vector<double> eigenvalues;
    /// Row-major n x n; column k is the unit eigenvector of eigenvalues[k],
    /// signed so that its largest-magnitude component is positive.
    std::vector<double> eigenvectors;

    std::size_t dimension() const { return eigenvalues.size(); }
    double vector_component(std::size_t row, std::size_t k) const {
        return eigenvectors[row * eigenvalues.size() + k];
    }
};

/// Householder tridiagonalization followed by implicit-shift QL.
/// Throws kInvalidInput on non-finite entries, kNumerical if QL fails to
/// converge.
EigenDecomposition symmetric_eigensolve(const SymmetricMatrix &m);

/// Same algorithm without accumulating eigenvectors.
std::vector<double> symmetric_eigenvalues(const SymmetricMatrix &m);

// ---------------------------------------------------------------------------
// Nonlinear least squares

struct Bounds {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

struct FitOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-10;
    double step_tolerance = 1e-12;
};

struct FitResult {
    std::vector<double> parameters;
    /// sqrt(RSS/(m-n)) * sqrt(diag((J^T J)^-1)); NaN where undefined.
    std::vector<double> standard_errors;
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Fills `residuals` (length m) for the given parameters.
using ResidualFunction =
    std::function<void(std::span<const double> params, std::span<double> residuals)>;

/// Damped Gauss-Newton (Levenberg-Marquardt) with central-difference
/// Jacobians, step 1e-6 * max(|p|, 1). Trial points are clamped into
/// `bounds` (empty means unbounded). Never returns a residual norm above the
/// initial one. Throws kUnderdetermined if m < number of parameters and
/// kInvalidInput if `initial` violates the bounds.
FitResult least_squares(const ResidualFunction &residuals, std::size_t residual_count,
                        std::span<const double> initial, std::span<const Bounds> bounds = {},
                        const FitOptions &options = {});

/// Predicted y for a single x.
using PointModel = std::function<double(std::span<const double> params, double x)>;

/// Fits y ~ model(params, x) over (x, y) pairs.
FitResult nonlinear_least_squares(const PointModel &model, std::span<const double> x,
                                  std::span<const double> y, std::span<const double> initial,
                                  std::span<const Bounds> bounds = {},
                                  const FitOptions &options = {});

/// Solves the dense n x n system A x = b (row-major) with partial pivoting.
/// Returns nullopt when A is numerically singular.
std::optional<std::vector<double>> solve_linear_system(std::vector<double> a,
                                                       std::vector<double> b);

// ---------------------------------------------------------------------------
// Exponential decay fits

struct ExponentialFit {
    double amplitude = 0.0;
    /// Meaningful only when decay_time_determined.
    double decay_time = std::numeric_limits<double>::quiet_NaN();
    bool decay_time_determined = false;
    double amplitude_error = std::numeric_limits<double>::quiet_NaN();
    double decay_time_error = std::numeric_limits<double>::quiet_NaN();
    FitResult fit;
};

/// Best fit of y = A * exp(-|x| / tau) with tau bounded to
/// [0.1 * smallest nonzero |x| spacing, 100 * max |x|]. Needs at least three
/// points and two distinct |x|. All-zero data returns A = 0 with the decay
/// time flagged undetermined.
ExponentialFit fit_exponential(std::span<const double> x, std::span<const double> y);

}  // namespace qjump

#endif
