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

#ifndef QJUMP_JUMP_SIMULATOR_H_
#define QJUMP_JUMP_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace qjump {

enum class QubitState : std::uint8_t { kGround = 0, kExcited = 1 };

inline QubitState flipped(QubitState s) {
    return s == QubitState::kGround ? QubitState::kExcited : QubitState::kGround;
}

// ---------------------------------------------------------------------------
// Thermal equilibrium

/// Boltzmann excited-state population 1 / (1 + exp(h f01 / kB T)).
double equilibrium_population(double f01_ghz, double temperature_mk);

/// Exact inverse of equilibrium_population. p_e >= 0.5 is a negative (or
/// infinite) temperature and throws kNegativeTemperature.
double effective_temperature_mk(double p_e, double f01_ghz);

struct TransitionRates {
    double up = 0.0;    // g -> e, 1/us
    double down = 0.0;  // e -> g, 1/us
};

/// up = p_e / t1, down = (1 - p_e) / t1.
TransitionRates rates_from_t1(double t1_us, double p_e);

// ---------------------------------------------------------------------------
// Telegraph trajectories

struct TelegraphConfig {
    double t1_us = 100.0;
    double p_e = 0.0;
    double sample_period_us = 5.0;
    double duration_us = 20480.0;
    std::uint64_t seed = 0;
    /// Permits p_e >= 0.5.
    bool non_thermal = false;
    /// Drawn from (1 - p_e, p_e) when unset.
    std::optional<QubitState> initial_state;

    /// Throws kInvalidInput on any invariant violation.
    void validate() const;
    std::size_t bin_count() const;
};

struct TelegraphTrajectory {
    /// State at each bin midpoint.
    std::vector<QubitState> states;
    double sample_period_us = 5.0;
    QubitState initial_state = QubitState::kGround;
    /// Strictly increasing jump instants inside [0, duration).
    std::vector<double> jump_times_us;
    /// The first jump at or after the end of the record, as drawn by the
    /// simulator; +inf if the last dwell never ends.
    double end_jump_time_us = std::numeric_limits<double>::infinity();

    double duration_us() const { return sample_period_us * static_cast<double>(states.size()); }
};

/// Continuous-time two-state Markov process with exponential dwells, binned
/// by midpoint sampling. Deterministic in config.seed.
TelegraphTrajectory sample_trajectory(const TelegraphConfig &c);

/// State at time t implied by the initial state and jump list.
QubitState state_at(const TelegraphTrajectory &t, double time_us);

/// Rebins the jump list at midpoints; equals `states` for every trajectory
/// produced by this module.
std::vector<QubitState> bin_states(const TelegraphTrajectory &t);

/// Every dwell the simulator drew, split by state: the dwell starting at 0
/// and the dwell running past the end (up to end_jump_time_us) included.
/// The final dwell is omitted when it never ends.
struct DwellLengths {
    std::vector<double> ground;
    std::vector<double> excited;
};
DwellLengths dwell_lengths(const TelegraphTrajectory &t);

// ---------------------------------------------------------------------------
// Correlated pairs

struct CorrelationInjection {
    /// Fraction of the record covered by correlated epochs.
    double fraction = 0.0;
    double epoch_mean_length_us = 500.0;
    /// Time constant of the shared jump schedule inside epochs.
    double correlated_t1_us = 100.0;
    /// Population of the shared schedule; device A's p_e when unset.
    std::optional<double> correlated_p_e;

    void validate(double sample_period_us) const;
};

struct Epoch {
    double start_us = 0.0;
    double end_us = 0.0;
};

struct CorrelatedPair {
    TelegraphTrajectory a;
    TelegraphTrajectory b;
    std::vector<Epoch> epochs;
};

/// Nominal mean dwell length of the shared schedule: the average of its g
/// and e mean dwells.
double correlated_mean_dwell_us(const CorrelationInjection &inj, double fallback_p_e);

/// Two trajectories that share one jump schedule inside correlated epochs.
///
/// Epoch lengths are exponential with the configured mean, truncated so they
/// sum to fraction * duration, and placed uniformly without overlap with at
/// least one sample period between epochs. Outside epochs each device
/// evolves on its own. An epoch begins at its planned start if the devices
/// agree there, otherwise at the next free jump of either device (after
/// which they agree), and keeps its drawn length; later epochs move back as
/// needed and anything past the record end is cut. Inside an epoch both
/// devices jump at the same instants. `epochs` holds the realized spans, so
/// the realized fraction can fall slightly short of the target. fraction = 1
/// is one epoch covering the record with B started in A's state. Throws
/// kPacking if the planned epochs do not fit.
CorrelatedPair sample_correlated_pair(const TelegraphConfig &ca, const TelegraphConfig &cb,
                                      const CorrelationInjection &inj, std::uint64_t seed);

/// Lengths (us) of the binned constant-state runs of both devices that
/// overlap a correlated epoch: the time the qubits actually spend in a state
/// around correlated times.
std::vector<double> epoch_run_lengths_us(const CorrelatedPair &pair);

// ---------------------------------------------------------------------------
// Readout

/// Per-sample single-shot assignment fidelity Phi(separation / (2 sigma)) of
/// a midpoint classifier, inverted for sigma. target <= 0.5 or >= 1 throws
/// kInfeasible.
double sigma_for_fidelity(double target_fidelity, double separation);

/// Inverse standard normal CDF. Rational approximation refined by one Halley
/// step; absolute error below 1e-12 on (1e-300, 1 - 1e-16).
double inverse_normal_cdf(double p);
double normal_cdf(double x);

struct IQPoint {
    double i = 0.0;
    double q = 0.0;
};

struct ReadoutModel {
    IQPoint mean_g;
    IQPoint mean_e;
    /// Per-quadrature noise standard deviation.
    double sigma = 1.0;

    double separation() const;
    void validate() const;
};

struct IQRecord {
    /// Interleaved I, Q as stored on disk (binary32).
    std::vector<float> iq;
    double sample_period_us = 5.0;

    std::size_t size() const { return iq.size() / 2; }
    float i(std::size_t t) const { return iq[2 * t]; }
    float q(std::size_t t) const { return iq[2 * t + 1]; }
};

/// Each sample is the state mean plus independent Gaussian noise per
/// quadrature. Deterministic in seed.
IQRecord synthesize_iq(std::span<const QubitState> states, double sample_period_us,
                       const ReadoutModel &r, std::uint64_t seed);
IQRecord synthesize_iq(const TelegraphTrajectory &t, const ReadoutModel &r, std::uint64_t seed);

struct HistogramRange {
    double i_min = 0.0;
    double i_max = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
};

struct Histogram2D {
    std::size_t bins_i = 0;
    std::size_t bins_q = 0;
    HistogramRange range;
    /// Row-major [i_bin * bins_q + q_bin].
    std::vector<std::uint64_t> counts;
    std::uint64_t overflow = 0;

    std::uint64_t in_range() const;
    std::uint64_t total() const { return in_range() + overflow; }
    std::uint64_t at(std::size_t bi, std::size_t bq) const { return counts[bi * bins_q + bq]; }
    double bin_width_i() const { return (range.i_max - range.i_min) / double(bins_i); }
    double bin_width_q() const { return (range.q_max - range.q_min) / double(bins_q); }
    double center_i(std::size_t bi) const { return range.i_min + (double(bi) + 0.5) * bin_width_i(); }
    double center_q(std::size_t bq) const { return range.q_min + (double(bq) + 0.5) * bin_width_q(); }
};

/// Bins are half-open [lo, hi) except the last, which includes its upper
/// edge. Samples outside the range go to `overflow`.
Histogram2D histogram2d(std::span<const IQRecord> records, std::size_t bins_i, std::size_t bins_q,
                        const HistogramRange &range);

/// Standard error of the time-averaged excited fraction of `records`
/// independent equilibrium records of `samples_per_record` bins each.
double occupation_standard_error(double p_e, double t1_us, double sample_period_us,
                                 std::size_t samples_per_record, std::size_t records);

}  // namespace qjump

#endif
