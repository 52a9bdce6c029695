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

#include "qjump/state_estimator.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qjump/error.h"
#include "qjump/numerics.h"
#include "qjump/simd/kernels.h"

namespace qjump {

PeakModel PeakModel::from_readout(const ReadoutModel &r) {
    r.validate();
    const double sep = r.separation();
    PeakModel p;
    p.center_g = r.mean_g;
    p.center_e = r.mean_e;
    p.sigma_g = p.sigma_e = r.sigma;
    p.weight_g = 0.5;
    return p.projected((r.mean_e.i - r.mean_g.i) / sep, (r.mean_e.q - r.mean_g.q) / sep);
}

PeakModel PeakModel::projected(double ai, double aq) const {
    PeakModel p = *this;
    const double norm = std::hypot(ai, aq);
    if (!(norm > 0)) {
        fail(ErrorCode::kInvalidInput, "projection axis must be nonzero");
    }
    p.axis_i = ai / norm;
    p.axis_q = aq / norm;
    p.mu_g = center_g.i * p.axis_i + center_g.q * p.axis_q;
    p.mu_e = center_e.i * p.axis_i + center_e.q * p.axis_q;
    return p;
}

void PeakModel::validate() const {
    if (!(sigma_g > 0) || !(sigma_e > 0)) {
        fail(ErrorCode::kInvalidPeaks, "peak widths must be positive");
    }
    if (!(mu_g != mu_e) || !std::isfinite(mu_g) || !std::isfinite(mu_e)) {
        fail(ErrorCode::kInvalidPeaks, "peak positions must be finite and distinct");
    }
}

namespace {

struct Component {
    double ci = 0.0;
    double cq = 0.0;
    double sigma = 1.0;
};

// Weighted 2-means over bin centers, seeded at the heaviest bin and the bin
// maximizing count * squared distance from it.
std::pair<Component, Component> seed_components(const Histogram2D &h, double &weight_first) {
    const std::size_t nb = h.counts.size();
    std::size_t first = 0;
    for (std::size_t b = 1; b < nb; ++b) {
        if (h.counts[b] > h.counts[first]) {
            first = b;
        }
    }
    auto ci = [&](std::size_t b) { return h.center_i(b / h.bins_q); };
    auto cq = [&](std::size_t b) { return h.center_q(b % h.bins_q); };
    double best = -1;
    std::size_t second = first;
    for (std::size_t b = 0; b < nb; ++b) {
        const double d2 = std::pow(ci(b) - ci(first), 2) + std::pow(cq(b) - cq(first), 2);
        const double score = static_cast<double>(h.counts[b]) * d2;
        if (score > best) {
            best = score;
            second = b;
        }
    }
    Component c[2] = {{ci(first), cq(first), 1.0}, {ci(second), cq(second), 1.0}};
    double mass[2] = {0, 0};
    for (int iter = 0; iter < 30; ++iter) {
        double si[2] = {0, 0}, sq[2] = {0, 0}, ss[2] = {0, 0};
        mass[0] = mass[1] = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            const double w = static_cast<double>(h.counts[b]);
            if (w == 0) {
                continue;
            }
            const double d0 = std::pow(ci(b) - c[0].ci, 2) + std::pow(cq(b) - c[0].cq, 2);
            const double d1 = std::pow(ci(b) - c[1].ci, 2) + std::pow(cq(b) - c[1].cq, 2);
            const int k = d0 <= d1 ? 0 : 1;
            mass[k] += w;
            si[k] += w * ci(b);
            sq[k] += w * cq(b);
        }
        for (int k = 0; k < 2; ++k) {
            if (mass[k] > 0) {
                c[k].ci = si[k] / mass[k];
                c[k].cq = sq[k] / mass[k];
            }
        }
        for (std::size_t b = 0; b < nb; ++b) {
            const double w = static_cast<double>(h.counts[b]);
            if (w == 0) {
                continue;
            }
            const double d0 = std::pow(ci(b) - c[0].ci, 2) + std::pow(cq(b) - c[0].cq, 2);
            const double d1 = std::pow(ci(b) - c[1].ci, 2) + std::pow(cq(b) - c[1].cq, 2);
            const int k = d0 <= d1 ? 0 : 1;
            ss[k] += w * std::min(d0, d1);
        }
        for (int k = 0; k < 2; ++k) {
            const double floor = 0.5 * std::min(h.bin_width_i(), h.bin_width_q());
            c[k].sigma = mass[k] > 0 ? std::max(std::sqrt(ss[k] / (2 * mass[k])), floor) : floor;
        }
    }
    const double total = mass[0] + mass[1];
    weight_first = total > 0 ? mass[0] / total : 0.5;
    weight_first = std::clamp(weight_first, 0.01, 0.99);
    return {c[0], c[1]};
}

// Probability mass of N(center, sigma) in each of `bins` cells on [lo, hi].
void axis_masses(double center, double sigma, double lo, double width, std::size_t bins,
                 std::vector<double> &out) {
    out.resize(bins);
    double prev = normal_cdf((lo - center) / sigma);
    for (std::size_t b = 0; b < bins; ++b) {
        const double edge = lo + width * static_cast<double>(b + 1);
        const double cur = normal_cdf((edge - center) / sigma);
        out[b] = cur - prev;
        prev = cur;
    }
}

}  // namespace

PeakModel estimate_peaks(const Histogram2D &h, bool thermal) {
    if (h.in_range() == 0) {
        fail(ErrorCode::kUnresolvablePeaks, "histogram is empty");
    }
    double w0 = 0.5;
    auto [c0, c1] = seed_components(h, w0);
    const double total = static_cast<double>(h.total());
    const std::size_t m = h.counts.size();
    const double min_sigma = 1e-3 * std::min(h.bin_width_i(), h.bin_width_q());

    std::vector<double> weights(m, 1.0);
    std::vector<double> m0i, m0q, m1i, m1q;
    auto model = [&](std::span<const double> p, std::size_t b) {
        const std::size_t bi = b / h.bins_q;
        const std::size_t bq = b % h.bins_q;
        return total * (p[0] * m0i[bi] * m0q[bq] + (1.0 - p[0]) * m1i[bi] * m1q[bq]);
    };
    auto prepare = [&](std::span<const double> p) {
        axis_masses(p[1], p[3], h.range.i_min, h.bin_width_i(), h.bins_i, m0i);
        axis_masses(p[2], p[3], h.range.q_min, h.bin_width_q(), h.bins_q, m0q);
        axis_masses(p[4], p[6], h.range.i_min, h.bin_width_i(), h.bins_i, m1i);
        axis_masses(p[5], p[6], h.range.q_min, h.bin_width_q(), h.bins_q, m1q);
    };
    auto residuals = [&](std::span<const double> p, std::span<double> r) {
        prepare(p);
        for (std::size_t b = 0; b < m; ++b) {
            r[b] = (model(p, b) - static_cast<double>(h.counts[b])) * weights[b];
        }
    };
    const double inf = std::numeric_limits<double>::infinity();
    const Bounds bounds[7] = {{0.0, 1.0}, {-inf, inf}, {-inf, inf}, {min_sigma, inf},
                              {-inf, inf}, {-inf, inf}, {min_sigma, inf}};
    std::vector<double> start = {w0, c0.ci, c0.cq, c0.sigma, c1.ci, c1.cq, c1.sigma};

    FitResult fit = least_squares(residuals, m, start, bounds);
    prepare(fit.parameters);
    for (std::size_t b = 0; b < m; ++b) {
        weights[b] = 1.0 / std::sqrt(std::max(model(fit.parameters, b), 1.0));
    }
    fit = least_squares(residuals, m, fit.parameters, bounds);

    const auto &p = fit.parameters;
    const double chi2 =
        fit.residual_norm * fit.residual_norm / static_cast<double>(m > 7 ? m - 7 : 1);
    Component a{p[1], p[2], p[3]};
    Component b{p[4], p[5], p[6]};
    double wa = p[0];
    const double separation = std::hypot(a.ci - b.ci, a.cq - b.cq);
    if (std::min(wa, 1.0 - wa) < 1e-3 || separation < 0.5 * (a.sigma + b.sigma) || chi2 > 10.0 ||
        !std::isfinite(chi2)) {
        fail(ErrorCode::kUnresolvablePeaks, "histogram does not show two resolvable peaks");
    }
    const bool a_is_ground = thermal ? wa >= 0.5 : a.ci <= b.ci;
    if (!a_is_ground) {
        std::swap(a, b);
        wa = 1.0 - wa;
    }
    PeakModel out;
    out.center_g = IQPoint{a.ci, a.cq};
    out.center_e = IQPoint{b.ci, b.cq};
    out.sigma_g = a.sigma;
    out.sigma_e = b.sigma;
    out.weight_g = wa;
    out.weight_g_error = fit.standard_errors[0];
    out.fit_chi2 = chi2;
    return out.projected(b.ci - a.ci, b.cq - a.cq);
}

PeakModel estimate_peaks(std::span<const IQRecord> records, bool thermal) {
    double imin = std::numeric_limits<double>::infinity(), imax = -imin;
    double qmin = imin, qmax = -imin;
    for (const auto &r : records) {
        for (std::size_t t = 0; t < r.size(); ++t) {
            imin = std::min<double>(imin, r.i(t));
            imax = std::max<double>(imax, r.i(t));
            qmin = std::min<double>(qmin, r.q(t));
            qmax = std::max<double>(qmax, r.q(t));
        }
    }
    if (!(imax > imin) || !(qmax > qmin)) {
        fail(ErrorCode::kUnresolvablePeaks, "records span no area in the IQ plane");
    }
    const double pi = 1e-3 * (imax - imin);
    const double pq = 1e-3 * (qmax - qmin);
    return estimate_peaks(histogram2d(records, 64, 64, {imin - pi, imax + pi, qmin - pq, qmax + pq}),
                          thermal);
}

FilterThresholds filter_thresholds(const PeakModel &peaks, const FilterOptions &options) {
    FilterThresholds th;
    th.peaks = options.projection == ProjectionMode::kIAxis ? peaks.projected(1.0, 0.0) : peaks;
    th.peaks.validate();
    th.orientation = th.peaks.mu_g < th.peaks.mu_e ? 1.0 : -1.0;
    const double mg = th.orientation * th.peaks.mu_g;
    const double me = th.orientation * th.peaks.mu_e;
    if (options.threshold == ThresholdMode::kNearNewState) {
        th.to_ground = mg + 0.5 * th.peaks.sigma_g;
        th.to_excited = me - 0.5 * th.peaks.sigma_e;
    } else {
        const double mid = 0.5 * (mg + me);
        th.to_ground = mid - 0.5 * th.peaks.sigma_g;
        th.to_excited = mid + 0.5 * th.peaks.sigma_e;
    }
    if (!(th.to_ground < th.to_excited)) {
        fail(ErrorCode::kInvalidPeaks, "thresholds leave no hysteresis band");
    }
    return th;
}

std::vector<QubitState> hysteresis_latch(std::span<const double> x, const FilterThresholds &th,
                                         std::optional<QubitState> initial) {
    std::vector<QubitState> out(x.size());
    if (x.empty()) {
        return out;
    }
    const double mg = th.orientation * th.peaks.mu_g;
    const double me = th.orientation * th.peaks.mu_e;
    QubitState s = initial ? *initial
                           : (std::abs(x[0] - mg) <= std::abs(x[0] - me) ? QubitState::kGround
                                                                         : QubitState::kExcited);
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (s == QubitState::kGround) {
            if (x[t] >= th.to_excited) {
                s = QubitState::kExcited;
            }
        } else if (x[t] <= th.to_ground) {
            s = QubitState::kGround;
        }
        out[t] = s;
    }
    return out;
}

StateTrace two_point_filter(const IQRecord &record, const PeakModel &peaks,
                            const FilterOptions &options) {
    const FilterThresholds th = filter_thresholds(peaks, options);
    std::vector<double> x(record.size());
    simd::project_iq(record.iq, th.orientation * th.peaks.axis_i, th.orientation * th.peaks.axis_q, x);
    return StateTrace{hysteresis_latch(x, th, options.initial), record.sample_period_us};
}

std::vector<Run> state_runs(std::span<const QubitState> states) {
    std::vector<Run> runs;
    for (std::size_t t = 0; t < states.size(); ++t) {
        if (runs.empty() || runs.back().state != states[t]) {
            runs.push_back(Run{t, 0, states[t]});
        }
        ++runs.back().length;
    }
    return runs;
}

DwellSeries dwell_series(const StateTrace &trace) {
    if (trace.states.empty()) {
        fail(ErrorCode::kInvalidInput, "state trace is empty");
    }
    DwellSeries d;
    d.sample_period_us = trace.sample_period_us;
    d.tau_us.resize(trace.states.size());
    d.boundary.resize(trace.states.size());
    const auto runs = state_runs(trace.states);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const double tau = static_cast<double>(runs[r].length) * trace.sample_period_us;
        const std::uint8_t edge = (r == 0 || r + 1 == runs.size()) ? 1 : 0;
        for (std::size_t t = runs[r].start; t < runs[r].start + runs[r].length; ++t) {
            d.tau_us[t] = tau;
            d.boundary[t] = edge;
        }
    }
    return d;
}

double readout_fidelity(std::span<const QubitState> truth, std::span<const QubitState> estimate) {
    if (truth.size() != estimate.size() || truth.empty()) {
        fail(ErrorCode::kInvalidInput, "traces must be nonempty and of equal length");
    }
    std::size_t agree = 0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        agree += truth[t] == estimate[t] ? 1 : 0;
    }
    return static_cast<double>(agree) / static_cast<double>(truth.size());
}

double readout_fidelity(const StateTrace &truth, const StateTrace &estimate) {
    return readout_fidelity(truth.states, estimate.states);
}

void DwellTally::add(std::span<const QubitState> states, double sample_period_us) {
    const auto runs = state_runs(states);
    for (std::size_t r = 1; r + 1 < runs.size(); ++r) {
        const double len = static_cast<double>(runs[r].length) * sample_period_us;
        if (runs[r].state == QubitState::kGround) {
            ground_total_us += len;
            ++ground_count;
        } else {
            excited_total_us += len;
            ++excited_count;
        }
    }
}

void DwellTally::add(const StateTrace &trace) { add(trace.states, trace.sample_period_us); }

T1Estimate estimate_t1(const DwellTally &tally) {
    constexpr std::size_t kMinDwells = 20;
    if (tally.ground_count < kMinDwells || tally.excited_count < kMinDwells) {
        fail(ErrorCode::kInsufficientStatistics, "need at least 20 complete dwells in each state");
    }
    T1Estimate e;
    e.dwells_g = tally.ground_count;
    e.dwells_e = tally.excited_count;
    e.mean_dwell_g_us = tally.mean_ground_us();
    e.mean_dwell_e_us = tally.mean_excited_us();
    const double up = 1.0 / e.mean_dwell_g_us;
    const double down = 1.0 / e.mean_dwell_e_us;
    const double sum = up + down;
    e.t1_us = 1.0 / sum;
    e.p_e = up / sum;
    const double d_up = up / std::sqrt(static_cast<double>(e.dwells_g));
    const double d_down = down / std::sqrt(static_cast<double>(e.dwells_e));
    e.t1_error_us = std::hypot(d_up, d_down) / (sum * sum);
    e.p_e_error = std::hypot(down * d_up, up * d_down) / (sum * sum);
    return e;
}

T1Estimate estimate_t1(const DwellSeries &d, const StateTrace &trace) {
    if (d.size() != trace.states.size()) {
        fail(ErrorCode::kInvalidInput, "dwell series and trace lengths differ");
    }
    DwellTally tally;
    tally.add(trace);
    return estimate_t1(tally);
}

}  // namespace qjump
