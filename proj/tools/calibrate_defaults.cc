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

// Solves for the default Josephson energies: with E_L fixed by the 455 nH
// array and E_C = 1 GHz, bisect E_J until f01(0.5) hits the target. f01 at
// half flux decreases monotonically in E_J over the bracket.

#include <cstdio>

#include "qjump/fluxonium.h"

namespace {

double solve_ej(double target_ghz, double e_c, double e_l) {
    double lo = 0.5;
    double hi = 20.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f01 =
            qjump::transition_frequency(qjump::FluxoniumParams{mid, e_c, e_l, 100}, qjump::FluxPoint{0.5});
        if (f01 > target_ghz) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

int main() {
    const double e_l = qjump::el_from_inductance(455.0);
    const double e_c = 1.0;
    std::printf("e_l_ghz=%.12f\n", e_l);
    std::printf("e_c_ghz=%.12f\n", e_c);
    std::printf("device_a_e_j_ghz=%.12f\n", solve_ej(0.565, e_c, e_l));
    std::printf("device_b_e_j_ghz=%.12f\n", solve_ej(0.579, e_c, e_l));
    return 0;
}
