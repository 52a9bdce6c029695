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

#ifndef QJUMP_FLUXONIUM_H_
#define QJUMP_FLUXONIUM_H_

#include <cstddef>
#include <span>
#include <vector>

#include "qjump/numerics.h"

namespace qjump {

namespace constants {
inline constexpr double kPlanck = 6.62607015e-34;         // J s
inline constexpr double kBoltzmann = 1.380649e-23;        // J / K
inline constexpr double kFluxQuantum = 2.067833848e-15;   // Wb
inline constexpr double kPi = 3.141592653589793238462643383279502884;
}  // namespace constants

/// Fluxonium circuit energies in GHz (energy / h).
///
/// H = 4 E_C n^2 + E_L phi^2 / 2 - E_J cos(phi - 2 pi phi_ext)
///
/// The external flux sits in the cosine term, which keeps the matrix real in
/// the oscillator basis of the quadratic part.
struct FluxoniumParams {
    double e_j = 0.0;
    double e_c = 0.0;
    double e_l = 0.0;
    int basis_size = 100;

    /// Throws kInvalidInput unless energies are positive and basis_size >= 10.
    void validate() const;
};

/// External flux in units of the flux quantum.
struct FluxPoint {
    double phi_ext = 0.0;
};

struct SpectrumPoint {
    double phi_ext = 0.0;
    double f01 = 0.0;  // GHz
};

/// E_L = (Phi_0 / 2 pi)^2 / (L h), returned in GHz.
double el_from_inductance(double inductance_nh);

/// Calibrated defaults: E_L from the 455 nH array, E_C fixed at 1 GHz, and
/// E_J solved so that f01(0.5) is 565 MHz (device A) or 579 MHz (device B).
/// Regenerate with the `calibrate_defaults` tool.
FluxoniumParams device_a_defaults();
FluxoniumParams device_b_defaults();

/// Hamiltonian in the truncated oscillator basis, in GHz.
SymmetricMatrix build_hamiltonian(const FluxoniumParams &p, FluxPoint f);

/// Ascending eigenvalues of build_hamiltonian, in GHz.
std::vector<double> energy_levels(const FluxoniumParams &p, FluxPoint f);

/// E_j - E_i. Requires i < j < basis_size / 2 (kTruncationUnsafe otherwise).
double transition_frequency(const FluxoniumParams &p, FluxPoint f, int i = 0, int j = 1);

/// f01 at each flux, in input order. Points may be evaluated in parallel.
std::vector<SpectrumPoint> spectrum_sweep(const FluxoniumParams &p, std::span<const FluxPoint> fluxes,
                                          std::size_t threads = 1);

struct SpectrumFit {
    FluxoniumParams params;
    /// Added to every measured phi_ext before evaluating the model.
    double flux_offset = 0.0;
    FitResult fit;
};

/// Least squares over (E_J, E_C, E_L[, flux offset]) minimizing the squared
/// f01 mismatch. Needs at least 4 points spanning at least 0.2 flux quanta.
SpectrumFit fit_spectrum(std::span<const SpectrumPoint> data, const FluxoniumParams &initial,
                         bool flux_offset_free);

}  // namespace qjump

#endif
