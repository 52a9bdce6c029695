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

#include "qjump/correlation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qjump/error.h"
#include "qjump/parallel.h"
#include "qjump/random.h"
#include "qjump/simd/kernels.h"

namespace qjump {

void DatasetEnsemble::validate() const {
    if (a.size() < 2 || a.size() != b.size()) {
        fail(ErrorCode::kInvalidInput, "ensemble needs equal numbers of A and B series, at least 2");
    }
    const std::size_t n = a.front().size();
    const double sp = a.front().sample_period_us;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].size() != n || b[k].size() != n || a[k].sample_period_us != sp ||
            b[k].sample_period_us != sp) {
            fail(ErrorCode::kInvalidInput, "ensemble series differ in length or sample period");
        }
    }
    if (n == 0) {
        fail(ErrorCode::kInvalidInput, "ensemble series are empty");
    }
}

std::vector<double> lag_grid(double lo_us, double hi_us, double step_us) {
    if (!(step_us > 0) || !(hi_us >= lo_us)) {
        fail(ErrorCode::kInvalidInput, "lag grid needs step > 0 and hi >= lo");
    }
    const auto first = static_cast<std::int64_t>(std::llround(lo_us / step_us));
    const auto last = static_cast<std::int64_t>(std::llround(hi_us / step_us));
    std::vector<double> out;
    for (std::int64_t k = first; k <= last; ++k) {
        out.push_back(static_cast<double>(k) * step_us);
    }
    return out;
}

namespace {

std::vector<std::int64_t> lag_indices(std::span<const double> lags_us, double sample_period_us,
                                      std::size_t samples) {
    std::vector<std::int64_t> out;
    out.reserve(lags_us.size());
    for (std::size_t k = 0; k < lags_us.size(); ++k) {
        const double ratio = lags_us[k] / sample_period_us;
        const double rounded = std::round(ratio);
        if (!std::isfinite(ratio) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio))) {
            fail(ErrorCode::kInvalidInput, "lags must be integer multiples of the sample period");
        }
        const auto idx = static_cast<std::int64_t>(rounded);
        if (2 * std::abs(idx) >= static_cast<std::int64_t>(samples)) {
            fail(ErrorCode::kInvalidInput, "lags must be shorter than half the dataset duration");
        }
        if (k > 0 && idx <= out.back()) {
            fail(ErrorCode::kInvalidInput, "lags must be strictly increasing");
        }
        out.push_back(idx);
    }
    if (out.empty()) {
        fail(ErrorCode::kInvalidInput, "no lags given");
    }
    return out;
}

}  // namespace

CovarianceAccumulator::CovarianceAccumulator(std::size_t samples, double sample_period_us,
                                             std::span<const double> lags_us, std::size_t datasets)
    : samples_(samples),
      datasets_(datasets),
      lags_us_(lags_us.begin(), lags_us.end()),
      lags_(lag_indices(lags_us, sample_period_us, samples)) {
    if (datasets < 2) {
        fail(ErrorCode::kInvalidInput, "ensemble needs at least 2 datasets");
    }
    tau_a_.assign(datasets * samples, 0.0);
    tau_b_.assign(datasets * samples, 0.0);
}

void CovarianceAccumulator::set(std::size_t dataset, std::span<const double> tau_a,
                                std::span<const double> tau_b) {
    if (tau_a.size() != samples_ || tau_b.size() != samples_) {
        fail(ErrorCode::kInvalidInput, "dwell series length does not match the accumulator");
    }
    if (dataset >= datasets_) {
        fail(ErrorCode::kInvalidInput, "dataset index out of range");
    }
    std::copy(tau_a.begin(), tau_a.end(), tau_a_.begin() + dataset * samples_);
    std::copy(tau_b.begin(), tau_b.end(), tau_b_.begin() + dataset * samples_);
}

CovarianceCurve CovarianceAccumulator::finish(MeanMode mode, std::size_t threads) const {
    const std::size_t n = samples_;
    const std::size_t nl = lags_.size();
    const double count = static_cast<double>(datasets_);

    // Time-resolved mode scales each series by the inverse ensemble profile,
    // which turns the weighted sum into a plain lagged product.
    std::vector<double> inv_a;
    std::vector<double> inv_b;
    if (mode == MeanMode::kTimeResolved) {
        inv_a.assign(n, 0.0);
        inv_b.assign(n, 0.0);
        for (std::size_t k = 0; k < datasets_; ++k) {
            const auto a = series_a(k);
            const auto b = series_b(k);
            for (std::size_t t = 0; t < n; ++t) {
                inv_a[t] += a[t];
                inv_b[t] += b[t];
            }
        }
        for (std::size_t t = 0; t < n; ++t) {
            if (!(inv_a[t] != 0.0) || !(inv_b[t] != 0.0)) {
                fail(ErrorCode::kInvalidInput, "ensemble mean dwell is zero at some time");
            }
            inv_a[t] = count / inv_a[t];
            inv_b[t] = count / inv_b[t];
        }
    }

    // Per dataset and lag: product sum and the two window sums.
    std::vector<double> products(datasets_ * nl);
    std::vector<double> window_a(datasets_ * nl);
    std::vector<double> window_b(datasets_ * nl);
    parallel_for(datasets_, threads, [&](std::size_t k) {
        const auto a = series_a(k);
        const auto b = series_b(k);
        const auto out = std::span<double>(products).subspan(k * nl, nl);
        if (mode == MeanMode::kTimeResolved) {
            std::vector<double> sa(n);
            std::vector<double> sb(n);
            for (std::size_t t = 0; t < n; ++t) {
                sa[t] = a[t] * inv_a[t];
                sb[t] = b[t] * inv_b[t];
            }
            simd::lagged_products(sa, sb, lags_, out);
            return;
        }
        simd::lagged_products(a, b, lags_, out);
        std::vector<double> pa(n + 1, 0.0);
        std::vector<double> pb(n + 1, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            pa[t + 1] = pa[t] + a[t];
            pb[t + 1] = pb[t] + b[t];
        }
        for (std::size_t l = 0; l < nl; ++l) {
            const std::int64_t lag = lags_[l];
            const std::size_t begin = lag < 0 ? static_cast<std::size_t>(-lag) : 0;
            const std::size_t end = lag < 0 ? n : n - static_cast<std::size_t>(lag);
            window_a[k * nl + l] = pa[end] - pa[begin];
            window_b[k * nl + l] = pb[end + lag] - pb[begin + lag];
        }
    });

    CovarianceCurve curve;
    curve.delta_t_us = lags_us_;
    curve.c.assign(nl, 0.0);
    curve.standard_error.assign(nl, 0.0);
    std::vector<double> per_dataset(datasets_);
    for (std::size_t l = 0; l < nl; ++l) {
        const double overlap = static_cast<double>(n) - static_cast<double>(std::abs(lags_[l]));
        double grand_a = 0.0;
        double grand_b = 0.0;
        for (std::size_t k = 0; k < datasets_; ++k) {
            grand_a += window_a[k * nl + l];
            grand_b += window_b[k * nl + l];
        }
        grand_a /= overlap * count;
        grand_b /= overlap * count;
        for (std::size_t k = 0; k < datasets_; ++k) {
            double norm = 1.0;
            if (mode == MeanMode::kGrand) {
                norm = grand_a * grand_b;
            } else if (mode == MeanMode::kPerDataset) {
                norm = (window_a[k * nl + l] / overlap) * (window_b[k * nl + l] / overlap);
            }
            if (!(norm != 0.0)) {
                fail(ErrorCode::kInvalidInput, "dwell series mean is zero");
            }
            per_dataset[k] = products[k * nl + l] / (overlap * norm) - 1.0;
        }
        double mean = 0.0;
        for (double v : per_dataset) {
            mean += v;
        }
        mean /= count;
        double ss = 0.0;
        for (double v : per_dataset) {
            ss += (v - mean) * (v - mean);
        }
        curve.c[l] = mean;
        curve.standard_error[l] = std::sqrt(ss / (count - 1.0) / count);
    }
    return curve;
}

CovarianceCurve normalized_covariance(const DatasetEnsemble &e, std::span<const double> lags_us,
                                      MeanMode mode, std::size_t threads) {
    e.validate();
    CovarianceAccumulator acc(e.a.front().size(), e.a.front().sample_period_us, lags_us, e.count());
    for (std::size_t k = 0; k < e.count(); ++k) {
        acc.set(k, e.a[k].tau_us, e.b[k].tau_us);
    }
    return acc.finish(mode, threads);
}

namespace {

std::vector<double> indicator(const StateTrace &t) {
    std::vector<double> x(t.states.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = t.states[i] == QubitState::kExcited ? 1.0 : 0.0;
    }
    return x;
}

}  // namespace

StateCorrelationCurve state_correlation(std::span<const StateTrace> a, std::span<const StateTrace> b,
                                        std::span<const double> lags_us, std::size_t threads) {
    if (a.empty() || a.size() != b.size()) {
        fail(ErrorCode::kInvalidInput, "need equal, nonzero numbers of traces");
    }
    const std::size_t n = a.front().states.size();
    const double sp = a.front().sample_period_us;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].states.size() != n || b[k].states.size() != n) {
            fail(ErrorCode::kInvalidInput, "state traces differ in length");
        }
    }
    const auto lags = lag_indices(lags_us, sp, n);
    const std::size_t nl = lags.size();
    const std::size_t count = a.size();

    // Per dataset: sum xy per lag plus windowed sums of x and y.
    std::vector<double> sxy(count * nl), sx(count * nl), sy(count * nl);
    std::vector<double> total_a(count), total_b(count);
    parallel_for(count, threads, [&](std::size_t k) {
        const auto x = indicator(a[k]);
        const auto y = indicator(b[k]);
        std::vector<double> px(n + 1, 0.0), py(n + 1, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            px[t + 1] = px[t] + x[t];
            py[t + 1] = py[t] + y[t];
        }
        simd::lagged_products(x, y, lags, std::span<double>(sxy).subspan(k * nl, nl));
        for (std::size_t l = 0; l < nl; ++l) {
            const auto lag = lags[l];
            const std::size_t begin = lag < 0 ? static_cast<std::size_t>(-lag) : 0;
            const std::size_t end = lag < 0 ? n : n - static_cast<std::size_t>(lag);
            sx[k * nl + l] = px[end] - px[begin];
            sy[k * nl + l] = py[end + lag] - py[begin + lag];
        }
        total_a[k] = px[n];
        total_b[k] = py[n];
    });

    StateCorrelationCurve out;
    out.delta_t_us.assign(lags_us.begin(), lags_us.end());
    out.r.resize(nl);
    out.samples.resize(nl);
    out.effective_samples.resize(nl);
    for (std::size_t l = 0; l < nl; ++l) {
        double xy = 0, xs = 0, ys = 0;
        for (std::size_t k = 0; k < count; ++k) {
            xy += sxy[k * nl + l];
            xs += sx[k * nl + l];
            ys += sy[k * nl + l];
        }
        const double m = static_cast<double>(count) *
                         static_cast<double>(n - static_cast<std::size_t>(std::abs(lags[l])));
        // Binary sequences: sum x^2 == sum x.
        const double vx = xs - xs * xs / m;
        const double vy = ys - ys * ys / m;
        if (!(vx > 0) || !(vy > 0)) {
            fail(ErrorCode::kUndefinedCorrelation, "state trace is constant");
        }
        out.r[l] = (xy - xs * ys / m) / std::sqrt(vx * vy);
        out.samples[l] = m;
    }

    // Autocorrelations about the pooled means, added in blocks of lags until
    // the product rho_a(k) rho_b(k) falls below 1e-3 or turns negative.
    double mean_a = 0, mean_b = 0;
    for (std::size_t k = 0; k < count; ++k) {
        mean_a += total_a[k];
        mean_b += total_b[k];
    }
    const double all = static_cast<double>(count * n);
    mean_a /= all;
    mean_b /= all;
    const double var_a = mean_a * (1 - mean_a);
    const double var_b = mean_b * (1 - mean_b);
    constexpr std::size_t kBlock = 32;
    const std::size_t max_lag = n / 4;
    double inflation_sum = 0.0;
    bool done = max_lag == 0;
    for (std::size_t first = 1; !done && first <= max_lag; first += kBlock) {
        const std::size_t last = std::min(max_lag, first + kBlock - 1);
        std::vector<std::int64_t> block;
        for (std::size_t k = first; k <= last; ++k) {
            block.push_back(static_cast<std::int64_t>(k));
        }
        const std::size_t nb = block.size();
        std::vector<double> caa(count * nb), cbb(count * nb);
        parallel_for(count, threads, [&](std::size_t k) {
            auto x = indicator(a[k]);
            auto y = indicator(b[k]);
            for (auto &v : x) v -= mean_a;
            for (auto &v : y) v -= mean_b;
            simd::lagged_products(x, x, block, std::span<double>(caa).subspan(k * nb, nb));
            simd::lagged_products(y, y, block, std::span<double>(cbb).subspan(k * nb, nb));
        });
        for (std::size_t j = 0; j < nb; ++j) {
            double sa = 0, sb = 0;
            for (std::size_t k = 0; k < count; ++k) {
                sa += caa[k * nb + j];
                sb += cbb[k * nb + j];
            }
            const double pairs = static_cast<double>(count * (n - static_cast<std::size_t>(block[j])));
            const double rho = (sa / pairs / var_a) * (sb / pairs / var_b);
            if (!(rho > 1e-3)) {
                done = true;
                break;
            }
            inflation_sum += rho;
        }
    }
    out.variance_inflation = 1.0 + 2.0 * inflation_sum;
    for (std::size_t l = 0; l < nl; ++l) {
        out.effective_samples[l] = out.samples[l] / out.variance_inflation;
    }
    return out;
}

StateCorrelationCurve state_correlation(const StateTrace &a, const StateTrace &b,
                                        std::span<const double> lags_us) {
    if (a.states.size() != b.states.size()) {
        fail(ErrorCode::kInvalidInput, "state traces differ in length");
    }
    return state_correlation(std::span<const StateTrace>(&a, 1), std::span<const StateTrace>(&b, 1),
                             lags_us);
}

ExponentialFit fit_covariance_decay(CovarianceCurve &curve) {
    if (curve.delta_t_us.size() < 5) {
        fail(ErrorCode::kInvalidInput, "covariance decay fit needs at least 5 lags");
    }
    curve.fit = fit_exponential(curve.delta_t_us, curve.c);
    return *curve.fit;
}

DatasetSeeds dataset_seeds(std::uint64_t ensemble_seed, std::size_t k) {
    return DatasetSeeds{derive_seed(ensemble_seed, streams::kTrajectory, k),
                        derive_seed(ensemble_seed, streams::kReadout, 2 * k),
                        derive_seed(ensemble_seed, streams::kReadout, 2 * k + 1)};
}

CovarianceCurve simulate_covariance(const EnsembleSpec &spec, std::span<const double> lags_us,
                                    MeanMode mode, std::size_t threads) {
    spec.device_a.validate();
    const std::size_t n = spec.device_a.bin_count();
    const double sp = spec.device_a.sample_period_us;
    CovarianceAccumulator acc(n, sp, lags_us, spec.datasets);
    const PeakModel peaks_a = spec.peaks_a.value_or(PeakModel::from_readout(spec.readout_a));
    const PeakModel peaks_b = spec.peaks_b.value_or(PeakModel::from_readout(spec.readout_b));
    parallel_for(spec.datasets, threads, [&](std::size_t k) {
        const DatasetSeeds seeds = dataset_seeds(spec.seed, k);
        const CorrelatedPair pair =
            sample_correlated_pair(spec.device_a, spec.device_b, spec.injection, seeds.pair);
        StateTrace ta{pair.a.states, sp};
        StateTrace tb{pair.b.states, sp};
        if (spec.source == StatesSource::kFiltered) {
            ta = two_point_filter(synthesize_iq(pair.a, spec.readout_a, seeds.readout_a), peaks_a,
                                  spec.filter);
            tb = two_point_filter(synthesize_iq(pair.b, spec.readout_b, seeds.readout_b), peaks_b,
                                  spec.filter);
        }
        acc.set(k, dwell_series(ta).tau_us, dwell_series(tb).tau_us);
    });
    return acc.finish(mode, threads);
}

double median(std::vector<double> values) {
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double percentile(std::vector<double> values, double p) {
    if (!(p >= 0 && p <= 100)) {
        fail(ErrorCode::kInvalidInput, "percentile must lie in [0, 100]");
    }
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::uint64_t threshold_ensemble_seed(std::uint64_t master, std::optional<std::size_t> fraction_index,
                                      std::size_t e) {
    const std::uint64_t group = fraction_index ? static_cast<std::uint64_t>(*fraction_index) + 1 : 0;
    return derive_seed(master, streams::kCalibration, (group << 32) | static_cast<std::uint64_t>(e));
}

ThresholdReport detection_threshold(const ThresholdConfig &config) {
    if (config.ensembles_per_fraction < 1 || config.null_ensembles < 1) {
        fail(ErrorCode::kInvalidInput, "need at least one ensemble per fraction and one null ensemble");
    }
    std::vector<double> fractions = config.fractions;
    std::sort(fractions.begin(), fractions.end());

    auto run = [&](double fraction, std::uint64_t seed) {
        EnsembleSpec spec = config.base;
        spec.injection.fraction = fraction;
        spec.seed = seed;
        CovarianceCurve curve = simulate_covariance(spec, config.lags_us, config.mean_mode, config.threads);
        return fit_covariance_decay(curve);
    };

    ThresholdReport report;
    std::vector<std::string> null_errors;
    for (std::size_t e = 0; e < config.null_ensembles; ++e) {
        try {
            report.null_amplitudes.push_back(
                run(0.0, threshold_ensemble_seed(config.seed, std::nullopt, e)).amplitude);
        } catch (const Error &err) {
            null_errors.push_back(err.what());
        }
    }
    if (report.null_amplitudes.empty()) {
        fail(ErrorCode::kNumerical, "every null ensemble failed: " + null_errors.front());
    }
    std::vector<double> magnitudes;
    for (double a : report.null_amplitudes) {
        magnitudes.push_back(std::abs(a));
    }
    report.null_floor = percentile(magnitudes, config.null_percentile);

    for (std::size_t j = 0; j < fractions.size(); ++j) {
        FractionResult fr;
        fr.fraction = fractions[j];
        double first_fit_error = 0.0;
        for (std::size_t e = 0; e < config.ensembles_per_fraction; ++e) {
            try {
                const ExponentialFit fit = run(fr.fraction, threshold_ensemble_seed(config.seed, j, e));
                if (fr.amplitudes.empty()) {
                    first_fit_error = fit.amplitude_error;
                }
                fr.amplitudes.push_back(fit.amplitude);
                fr.decay_times_us.push_back(fit.decay_time);
            } catch (const Error &err) {
                fr.errors.push_back(err.what());
            }
        }
        if (fr.amplitudes.empty()) {
            fail(ErrorCode::kNumerical, "every ensemble failed at fraction " +
                                            std::to_string(fr.fraction) + ": " + fr.errors.front());
        }
        fr.median_amplitude = median(fr.amplitudes);
        fr.median_decay_time_us = median(fr.decay_times_us);
        if (fr.amplitudes.size() > 1) {
            const double mean = std::accumulate(fr.amplitudes.begin(), fr.amplitudes.end(), 0.0) /
                                static_cast<double>(fr.amplitudes.size());
            double ss = 0.0;
            for (double a : fr.amplitudes) {
                ss += (a - mean) * (a - mean);
            }
            const double k = static_cast<double>(fr.amplitudes.size());
            fr.amplitude_error = std::sqrt(ss / (k - 1) / k);
        } else {
            fr.amplitude_error = first_fit_error;
        }
        fr.detected = fr.median_amplitude > report.null_floor;
        if (fr.detected && !report.smallest_detected) {
            report.smallest_detected = fr.fraction;
        }
        report.results.push_back(std::move(fr));
    }
    return report;
}

}  // namespace qjump
