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

#ifndef QJUMP_STATE_ESTIMATOR_H_
#define QJUMP_STATE_ESTIMATOR_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qjump/jump_simulator.h"

namespace qjump {

/// Two readout peaks. mu_* are positions along (axis_i, axis_q); the 2D
/// centers and mixture weights are kept for reporting and for switching the
/// projection axis.
struct PeakModel {
    double mu_g = 0.0;
    double mu_e = 1.0;
    double sigma_g = 1.0;
    double sigma_e = 1.0;
    double axis_i = 1.0;
    double axis_q = 0.0;

    IQPoint center_g;
    IQPoint center_e;
    double weight_g = 0.5;
    double weight_g_error = 0.0;
    /// Reduced chi-square of the mixture fit (0 when not fitted).
    double fit_chi2 = 0.0;

    /// Exact peaks of a readout model, projected on the g -> e axis.
    static PeakModel from_readout(const ReadoutModel &r);
    /// Same centers and widths projected on another unit axis.
    PeakModel projected(double axis_i, double axis_q) const;
    void validate() const;
};

/// Two-component isotropic Gaussian mixture fitted to the histogram
/// (bin-integrated, two passes: unweighted then Pearson-weighted). With
/// `thermal` the heavier component is labelled g; otherwise the component
/// with the smaller I. Throws kUnresolvablePeaks when the fit is poor or the
/// components are closer than (sigma_g + sigma_e) / 2.
PeakModel estimate_peaks(const Histogram2D &h, bool thermal = true);

/// Histograms the records on a 64 x 64 grid spanning the data, then fits.
PeakModel estimate_peaks(std::span<const IQRecord> records, bool thermal = true);

struct StateTrace {
    std::vector<QubitState> states;
    double sample_period_us = 5.0;
};

enum class ThresholdMode {
    /// Switch to a state once the signal is within sigma/2 of its peak on
    /// the side facing the other peak.
    kNearNewState,
    /// Switch once the signal passes sigma_new/2 beyond the midpoint.
    kBeyondMidpoint,
};

enum class ProjectionMode { kPeakAxis, kIAxis };

struct FilterOptions {
    ThresholdMode threshold = ThresholdMode::kNearNewState;
    ProjectionMode projection = ProjectionMode::kPeakAxis;
    /// Nearest peak to the first sample when unset.
    std::optional<QubitState> initial;
};

struct FilterThresholds {
    double to_ground = 0.0;   // switch e -> g when x <= to_ground
    double to_excited = 0.0;  // switch g -> e when x >= to_excited
    /// +1 or -1: orientation applied so that mu_g < mu_e.
    double orientation = 1.0;
    PeakModel peaks;
};

/// Resolves projection, orientation and thresholds. Throws kInvalidPeaks if
/// the hysteresis band is empty.
FilterThresholds filter_thresholds(const PeakModel &peaks, const FilterOptions &options);

/// Two-point hysteresis filter: the declared state changes only when the
/// projected signal crosses the threshold of the other state.
StateTrace two_point_filter(const IQRecord &record, const PeakModel &peaks,
                            const FilterOptions &options = {});

/// Runs the latch over already projected samples.
std::vector<QubitState> hysteresis_latch(std::span<const double> x, const FilterThresholds &th,
                                         std::optional<QubitState> initial);

struct Run {
    std::size_t start = 0;
    std::size_t length = 0;
    QubitState state = QubitState::kGround;
};

/// Maximal constant-state runs in order.
std::vector<Run> state_runs(std::span<const QubitState> states);

struct DwellSeries {
    /// Length of the run containing each sample, us.
    std::vector<double> tau_us;
    /// 1 where the run touches the first or last sample.
    std::vector<std::uint8_t> boundary;
    double sample_period_us = 5.0;

    std::size_t size() const { return tau_us.size(); }
};

DwellSeries dwell_series(const StateTrace &trace);

/// Fraction of samples where the traces agree.
double readout_fidelity(const StateTrace &truth, const StateTrace &estimate);
double readout_fidelity(std::span<const QubitState> truth, std::span<const QubitState> estimate);

/// Complete (not boundary-truncated) dwells pooled over any number of traces.
struct DwellTally {
    double ground_total_us = 0.0;
    double excited_total_us = 0.0;
    std::size_t ground_count = 0;
    std::size_t excited_count = 0;

    void add(const StateTrace &trace);
    void add(std::span<const QubitState> states, double sample_period_us);
    double mean_ground_us() const { return ground_total_us / double(ground_count); }
    double mean_excited_us() const { return excited_total_us / double(excited_count); }
};

struct T1Estimate {
    double t1_us = 0.0;
    double p_e = 0.0;
    double t1_error_us = 0.0;
    double p_e_error = 0.0;
    double mean_dwell_g_us = 0.0;
    double mean_dwell_e_us = 0.0;
    std::size_t dwells_g = 0;
    std::size_t dwells_e = 0;
};

/// gamma_up = 1 / mean complete g dwell, gamma_down = 1 / mean complete e
/// dwell, t1 = 1 / (gamma_up + gamma_down), p_e = gamma_up * t1. Each rate
/// carries relative error 1/sqrt(N). Needs 20 complete dwells per state.
T1Estimate estimate_t1(const DwellTally &tally);
T1Estimate estimate_t1(const DwellSeries &d, const StateTrace &trace);

}  // namespace qjump

#endif
