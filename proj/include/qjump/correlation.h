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

#ifndef QJUMP_CORRELATION_H_
#define QJUMP_CORRELATION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qjump/jump_simulator.h"
#include "qjump/numerics.h"
#include "qjump/state_estimator.h"

namespace qjump {

/// Paired dwell series, one pair per dataset; all series share length and
/// sample period. At least two datasets.
struct DatasetEnsemble {
    std::vector<DwellSeries> a;
    std::vector<DwellSeries> b;

    std::size_t count() const { return a.size(); }
    /// Throws kInvalidInput on empty or mismatched series.
    void validate() const;
};

enum class MeanMode {
    /// Normalize by means pooled over every dataset (and over the lag's
    /// overlap window).
    kGrand,
    /// Normalize each dataset by its own window means.
    kPerDataset,
    /// Normalize tau_A(t) tau_B(t + dt) by the ensemble means of tau_A at t
    /// and tau_B at t + dt. Removes the bias from the edge-depressed mean
    /// dwell profile, so independent devices give zero expectation.
    kTimeResolved,
};

struct CovarianceCurve {
    std::vector<double> delta_t_us;
    std::vector<double> c;
    /// Standard deviation of the per-dataset values over sqrt(count).
    std::vector<double> standard_error;
    std::optional<ExponentialFit> fit;
};

/// Lags lo, lo + step, ..., hi (inclusive, rounded to the step).
std::vector<double> lag_grid(double lo_us, double hi_us, double step_us);

/// Collects one pair of dwell series per dataset and evaluates the
/// normalized covariance. Slots are independent, so distinct datasets may be
/// set from different threads; finish() reduces in dataset order, so the
/// result does not depend on the thread count.
class CovarianceAccumulator {
   public:
    /// Throws kInvalidInput unless lags are strictly increasing multiples of
    /// the sample period with |lag| < samples * sample_period / 2, and there
    /// are at least 2 datasets.
    CovarianceAccumulator(std::size_t samples, double sample_period_us, std::span<const double> lags_us,
                          std::size_t datasets);

    void set(std::size_t dataset, std::span<const double> tau_a, std::span<const double> tau_b);
    CovarianceCurve finish(MeanMode mode = MeanMode::kGrand, std::size_t threads = 1) const;

    std::size_t datasets() const { return datasets_; }

   private:
    std::span<const double> series_a(std::size_t k) const { return {tau_a_.data() + k * samples_, samples_}; }
    std::span<const double> series_b(std::size_t k) const { return {tau_b_.data() + k * samples_, samples_}; }

    std::size_t samples_;
    std::size_t datasets_;
    std::vector<double> lags_us_;
    std::vector<std::int64_t> lags_;
    std::vector<double> tau_a_;  // datasets x samples
    std::vector<double> tau_b_;
};

/// C(dt) = mean over t and datasets of tau_A(t) tau_B(t + dt) / (mean tau_A
/// mean tau_B) - 1, each lag averaging over its overlap window only. In
/// kGrand and kPerDataset modes the means are taken over that same window,
/// so edge-depressed dwells near either end of a record do not bias long
/// lags; at dt = 0 the window is the whole record. Throws kInvalidInput when
/// a mean is zero.
CovarianceCurve normalized_covariance(const DatasetEnsemble &e, std::span<const double> lags_us,
                                      MeanMode mode = MeanMode::kGrand, std::size_t threads = 1);

struct StateCorrelationCurve {
    std::vector<double> delta_t_us;
    std::vector<double> r;
    /// Sample pairs entering each lag.
    std::vector<double> samples;
    /// samples / (1 + 2 sum_k rho_a(k) rho_b(k)), the null-variance
    /// correction for autocorrelated sequences.
    std::vector<double> effective_samples;
    double variance_inflation = 1.0;
};

/// Pearson correlation of the g=0 / e=1 sequences at each lag, pooled over
/// datasets. Throws kUndefinedCorrelation if either side is constant.
StateCorrelationCurve state_correlation(std::span<const StateTrace> a, std::span<const StateTrace> b,
                                        std::span<const double> lags_us, std::size_t threads = 1);
StateCorrelationCurve state_correlation(const StateTrace &a, const StateTrace &b,
                                        std::span<const double> lags_us);

/// Fits A exp(-|dt| / tau) to the curve and stores the result in it. Needs
/// at least 5 lags.
ExponentialFit fit_covariance_decay(CovarianceCurve &curve);

// ---------------------------------------------------------------------------
// Ensemble simulation and detection-threshold calibration

enum class StatesSource {
    /// Dwell series from the hysteresis filter applied to synthesized I/Q.
    kFiltered,
    /// Dwell series from the binned ground-truth trajectories.
    kTruth,
};

struct EnsembleSpec {
    TelegraphConfig device_a;
    TelegraphConfig device_b;
    ReadoutModel readout_a;
    ReadoutModel readout_b;
    CorrelationInjection injection;
    StatesSource source = StatesSource::kFiltered;
    FilterOptions filter;
    /// Filter peaks; exact readout peaks when unset.
    std::optional<PeakModel> peaks_a;
    std::optional<PeakModel> peaks_b;
    std::size_t datasets = 2000;
    std::uint64_t seed = 0;
};

/// Seeds used for dataset k of an ensemble.
struct DatasetSeeds {
    std::uint64_t pair;
    std::uint64_t readout_a;
    std::uint64_t readout_b;
};
DatasetSeeds dataset_seeds(std::uint64_t ensemble_seed, std::size_t k);

/// Simulates every dataset of the ensemble and returns the covariance curve.
CovarianceCurve simulate_covariance(const EnsembleSpec &spec, std::span<const double> lags_us,
                                    MeanMode mode = MeanMode::kTimeResolved, std::size_t threads = 1);

struct ThresholdConfig {
    EnsembleSpec base;
    std::vector<double> fractions;
    std::size_t ensembles_per_fraction = 1;
    std::size_t null_ensembles = 20;
    std::vector<double> lags_us;
    MeanMode mean_mode = MeanMode::kTimeResolved;
    /// Null floor percentile of |fitted amplitude|.
    double null_percentile = 95.0;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct FractionResult {
    double fraction = 0.0;
    std::vector<double> amplitudes;
    std::vector<double> decay_times_us;
    double median_amplitude = 0.0;
    double amplitude_error = 0.0;
    double median_decay_time_us = 0.0;
    bool detected = false;
    std::vector<std::string> errors;
};

struct ThresholdReport {
    std::vector<FractionResult> results;  // ascending fraction
    std::vector<double> null_amplitudes;
    double null_floor = 0.0;
    std::optional<double> smallest_detected;
};

/// Seed of ensemble `e` in a threshold run: null ensembles when
/// fraction_index is unset, else the fraction at that index of the sorted
/// fraction list.
std::uint64_t threshold_ensemble_seed(std::uint64_t master, std::optional<std::size_t> fraction_index,
                                      std::size_t e);

/// Simulates null and injected ensembles, fits each covariance decay, sets
/// the floor at the configured percentile of |null amplitude| and reports the
/// least fraction whose median amplitude exceeds it. Failed ensembles are
/// recorded; a fraction whose ensembles all fail throws kNumerical.
ThresholdReport detection_threshold(const ThresholdConfig &config);

double median(std::vector<double> values);
/// Linear-interpolation percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

}  // namespace qjump

#endif
