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

#include "qjump/fluxonium.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "qjump/error.h"
#include "qjump/parallel.h"

namespace qjump {

void FluxoniumParams::validate() const {
    if (!(e_j > 0) || !(e_c > 0) || !(e_l > 0) || !std::isfinite(e_j) || !std::isfinite(e_c) ||
        !std::isfinite(e_l)) {
        fail(ErrorCode::kInvalidInput, "fluxonium energies must be positive and finite");
    }
    if (basis_size < 10) {
        fail(ErrorCode::kInvalidInput, "fluxonium basis_size must be at least 10");
    }
}

double el_from_inductance(double inductance_nh) {
    if (!(inductance_nh > 0) || !std::isfinite(inductance_nh)) {
        fail(ErrorCode::kInvalidInput, "inductance must be positive");
    }
    const double reduced_flux = constants::kFluxQuantum / (2.0 * constants::kPi);
    const double joules = reduced_flux * reduced_flux / (inductance_nh * 1e-9);
    return joules / constants::kPlanck * 1e-9;
}

// Values produced by tools/calibrate_defaults.cc.
FluxoniumParams device_a_defaults() {
    return FluxoniumParams{2.041792266675, 1.0, el_from_inductance(455.0), 100};
}

FluxoniumParams device_b_defaults() {
    return FluxoniumParams{2.002030160171, 1.0, el_from_inductance(455.0), 100};
}

namespace {

// Eigen-decomposition of (a + a^dagger) in the truncated number basis. It is
// parameter independent, so it is computed once per basis size.
std::shared_ptr<const EigenDecomposition> position_basis(int n) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const EigenDecomposition>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    SymmetricMatrix x(static_cast<std::size_t>(n));
    for (int k = 0; k + 1 < n; ++k) {
        x.set(k, k + 1, std::sqrt(static_cast<double>(k + 1)));
    }
    auto decomposition = std::make_shared<const EigenDecomposition>(symmetric_eigensolve(x));
    cache.emplace(n, decomposition);
    return decomposition;
}

}  // namespace

SymmetricMatrix build_hamiltonian(const FluxoniumParams &p, FluxPoint f) {
    p.validate();
    if (!std::isfinite(f.phi_ext)) {
        fail(ErrorCode::kInvalidInput, "external flux must be finite");
    }
    const auto n = static_cast<std::size_t>(p.basis_size);
    const double omega = std::sqrt(8.0 * p.e_c * p.e_l);
    // phi = phi_zpf (a + a^dagger)
    const double phi_zpf = std::pow(2.0 * p.e_c / p.e_l, 0.25);
    const auto basis = position_basis(p.basis_size);

    // Reduce the flux modulo one quantum so large offsets keep full precision.
    const double phase = 2.0 * constants::kPi * (f.phi_ext - std::floor(f.phi_ext));
    std::vector<double> cosines(n);
    for (std::size_t k = 0; k < n; ++k) {
        cosines[k] = std::cos(phi_zpf * basis->eigenvalues[k] - phase);
    }

    SymmetricMatrix h(n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            row[k] = basis->vector_component(i, k) * cosines[k];
        }
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                acc += row[k] * basis->vector_component(j, k);
            }
            double value = -p.e_j * acc;
            if (i == j) {
                value += omega * (static_cast<double>(i) + 0.5);
            }
            h.set(i, j, value);
        }
    }
    return h;
}

std::vector<double> energy_levels(const FluxoniumParams &p, FluxPoint f) {
    return symmetric_eigenvalues(build_hamiltonian(p, f));
}

double transition_frequency(const FluxoniumParams &p, FluxPoint f, int i, int j) {
    p.validate();
    if (i < 0 || j <= i) {
        fail(ErrorCode::kInvalidInput, "transition levels must satisfy 0 <= i < j");
    }
    if (2 * j >= p.basis_size) {
        fail(ErrorCode::kTruncationUnsafe, "transition level beyond basis_size / 2");
    }
    const auto levels = energy_levels(p, f);
    return levels[j] - levels[i];
}

std::vector<SpectrumPoint> spectrum_sweep(const FluxoniumParams &p, std::span<const FluxPoint> fluxes,
                                          std::size_t threads) {
    if (fluxes.empty()) {
        fail(ErrorCode::kInvalidInput, "flux list is empty");
    }
    std::vector<SpectrumPoint> out(fluxes.size());
    parallel_for(fluxes.size(), threads, [&](std::size_t k) {
        out[k] = SpectrumPoint{fluxes[k].phi_ext, transition_frequency(p, fluxes[k])};
    });
    return out;
}

SpectrumFit fit_spectrum(std::span<const SpectrumPoint> data, const FluxoniumParams &initial,
                         bool flux_offset_free) {
    initial.validate();
    if (data.size() < 4) {
        fail(ErrorCode::kUnderdetermined, "spectrum fit needs at least 4 data points");
    }
    const auto [lo, hi] = std::minmax_element(
        data.begin(), data.end(),
        [](const SpectrumPoint &a, const SpectrumPoint &b) { return a.phi_ext < b.phi_ext; });
    if (hi->phi_ext - lo->phi_ext < 0.2) {
        fail(ErrorCode::kUnderdetermined, "spectrum data must span at least 0.2 flux quanta");
    }

    std::vector<double> start = {initial.e_j, initial.e_c, initial.e_l};
    std::vector<Bounds> bounds(3, Bounds{1e-6, std::numeric_limits<double>::infinity()});
    if (flux_offset_free) {
        start.push_back(0.0);
        bounds.push_back(Bounds{-0.5, 0.5});
    }
    const int basis = initial.basis_size;
    auto residuals = [&](std::span<const double> q, std::span<double> r) {
        const FluxoniumParams trial{q[0], q[1], q[2], basis};
        const double offset = q.size() > 3 ? q[3] : 0.0;
        for (std::size_t k = 0; k < data.size(); ++k) {
            r[k] = transition_frequency(trial, FluxPoint{data[k].phi_ext + offset}) - data[k].f01;
        }
    };
    SpectrumFit out;
    out.fit = least_squares(residuals, data.size(), start, bounds);
    const auto &q = out.fit.parameters;
    out.params = FluxoniumParams{q[0], q[1], q[2], basis};
    out.flux_offset = flux_offset_free ? q[3] : 0.0;
    return out;
}

}  // namespace qjump
