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

#include "qjump/jump_simulator.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "qjump/error.h"
#include "qjump/fluxonium.h"
#include "qjump/random.h"

namespace qjump {

double equilibrium_population(double f01_ghz, double temperature_mk) {
    if (!(f01_ghz > 0) || !(temperature_mk > 0)) {
        fail(ErrorCode::kInvalidInput, "frequency and temperature must be positive");
    }
    const double x = constants::kPlanck * f01_ghz * 1e9 /
                     (constants::kBoltzmann * temperature_mk * 1e-3);
    return 1.0 / (1.0 + std::exp(x));
}

double effective_temperature_mk(double p_e, double f01_ghz) {
    if (!(f01_ghz > 0)) {
        fail(ErrorCode::kInvalidInput, "frequency must be positive");
    }
    if (!(p_e > 0)) {
        fail(ErrorCode::kInvalidInput, "population must be positive");
    }
    if (p_e >= 0.5) {
        fail(ErrorCode::kNegativeTemperature, "population >= 0.5 implies a non-positive temperature");
    }
    const double x = std::log((1.0 - p_e) / p_e);
    return constants::kPlanck * f01_ghz * 1e9 / (constants::kBoltzmann * x) * 1e3;
}

TransitionRates rates_from_t1(double t1_us, double p_e) {
    if (!(t1_us > 0)) {
        fail(ErrorCode::kInvalidInput, "t1 must be positive");
    }
    if (!(p_e >= 0 && p_e < 1)) {
        fail(ErrorCode::kInvalidInput, "p_e must lie in [0, 1)");
    }
    return TransitionRates{p_e / t1_us, (1.0 - p_e) / t1_us};
}

void TelegraphConfig::validate() const {
    if (!(t1_us > 0) || !std::isfinite(t1_us)) {
        fail(ErrorCode::kInvalidInput, "t1 must be positive and finite");
    }
    if (!(p_e >= 0 && p_e < 1)) {
        fail(ErrorCode::kInvalidInput, "p_e must lie in [0, 1)");
    }
    if (p_e >= 0.5 && !non_thermal) {
        fail(ErrorCode::kInvalidInput, "p_e >= 0.5 requires the non-thermal flag");
    }
    if (!(sample_period_us > 0) || !(duration_us > 0)) {
        fail(ErrorCode::kInvalidInput, "sample period and duration must be positive");
    }
    const double bins = duration_us / sample_period_us;
    if (std::abs(bins - std::round(bins)) > 1e-9 * bins || std::round(bins) < 1) {
        fail(ErrorCode::kInvalidInput, "duration must be an integer multiple of the sample period");
    }
}

std::size_t TelegraphConfig::bin_count() const {
    return static_cast<std::size_t>(std::llround(duration_us / sample_period_us));
}

namespace {

double draw_dwell(Rng &rng, double rate) {
    if (rate <= 0) {
        return std::numeric_limits<double>::infinity();
    }
    std::exponential_distribution<double> exp(1.0);
    return exp(rng) / rate;
}

QubitState draw_state(Rng &rng, double p_e) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < p_e ? QubitState::kExcited : QubitState::kGround;
}

double rate_out_of(const TransitionRates &r, QubitState s) {
    return s == QubitState::kGround ? r.up : r.down;
}

// A qubit that evolves on its own between segment boundaries.
struct Walker {
    Rng rng;
    TransitionRates rates;
    QubitState state = QubitState::kGround;
    double next_jump = 0.0;
    std::vector<double> jumps;

    void redraw(double now) {
        next_jump = after(now, draw_dwell(rng, rate_out_of(rates, state)));
    }
    // Runs free until `end`; the pending jump time stays >= end.
    void run_until(double end) {
        while (next_jump < end) {
            jumps.push_back(next_jump);
            state = flipped(state);
            const double now = next_jump;
            redraw(now);
        }
    }
    static double after(double now, double dwell) {
        const double t = now + dwell;
        return t > now ? t : std::nextafter(now, std::numeric_limits<double>::infinity());
    }
};

void finish_trajectory(TelegraphTrajectory &t, std::size_t bins) {
    t.states.resize(bins);
    std::size_t next = 0;
    QubitState s = t.initial_state;
    for (std::size_t k = 0; k < bins; ++k) {
        const double center = (static_cast<double>(k) + 0.5) * t.sample_period_us;
        while (next < t.jump_times_us.size() && t.jump_times_us[next] <= center) {
            s = flipped(s);
            ++next;
        }
        t.states[k] = s;
    }
}

}  // namespace

TelegraphTrajectory sample_trajectory(const TelegraphConfig &c) {
    c.validate();
    const auto rates = rates_from_t1(c.t1_us, c.p_e);
    Walker w{Rng(c.seed), rates, QubitState::kGround, 0.0, {}};
    w.state = c.initial_state ? *c.initial_state : draw_state(w.rng, c.p_e);

    TelegraphTrajectory t;
    t.sample_period_us = c.sample_period_us;
    t.initial_state = w.state;
    w.redraw(0.0);
    const double duration = c.sample_period_us * static_cast<double>(c.bin_count());
    w.run_until(duration);
    t.jump_times_us = std::move(w.jumps);
    t.end_jump_time_us = w.next_jump;
    finish_trajectory(t, c.bin_count());
    return t;
}

QubitState state_at(const TelegraphTrajectory &t, double time_us) {
    const auto it = std::upper_bound(t.jump_times_us.begin(), t.jump_times_us.end(), time_us);
    const auto flips = static_cast<std::size_t>(it - t.jump_times_us.begin());
    return flips % 2 == 0 ? t.initial_state : flipped(t.initial_state);
}

std::vector<QubitState> bin_states(const TelegraphTrajectory &t) {
    std::vector<QubitState> out(t.states.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = state_at(t, (static_cast<double>(k) + 0.5) * t.sample_period_us);
    }
    return out;
}

DwellLengths dwell_lengths(const TelegraphTrajectory &t) {
    DwellLengths out;
    double start = 0.0;
    QubitState s = t.initial_state;
    auto push = [&](double end) {
        (s == QubitState::kGround ? out.ground : out.excited).push_back(end - start);
        start = end;
        s = flipped(s);
    };
    for (double jump : t.jump_times_us) {
        push(jump);
    }
    if (std::isfinite(t.end_jump_time_us)) {
        push(t.end_jump_time_us);
    }
    return out;
}

void CorrelationInjection::validate(double sample_period_us) const {
    if (!(fraction >= 0 && fraction <= 1)) {
        fail(ErrorCode::kInvalidInput, "injection fraction must lie in [0, 1]");
    }
    if (!(epoch_mean_length_us >= 10 * sample_period_us)) {
        fail(ErrorCode::kInvalidInput, "epoch mean length must be at least 10 sample periods");
    }
    if (!(correlated_t1_us > 0)) {
        fail(ErrorCode::kInvalidInput, "correlated t1 must be positive");
    }
    if (correlated_p_e && !(*correlated_p_e >= 0 && *correlated_p_e < 1)) {
        fail(ErrorCode::kInvalidInput, "correlated p_e must lie in [0, 1)");
    }
}

double correlated_mean_dwell_us(const CorrelationInjection &inj, double fallback_p_e) {
    const double p = inj.correlated_p_e.value_or(fallback_p_e);
    const auto r = rates_from_t1(inj.correlated_t1_us, p);
    double total = 0.0;
    int terms = 0;
    for (double rate : {r.up, r.down}) {
        if (rate > 0) {
            total += 1.0 / rate;
            ++terms;
        }
    }
    return terms > 0 ? total / terms : std::numeric_limits<double>::infinity();
}

namespace {

std::vector<Epoch> place_epochs(const CorrelationInjection &inj, double duration, double min_gap,
                                Rng &rng) {
    std::vector<Epoch> epochs;
    if (inj.fraction == 0.0) {
        return epochs;
    }
    if (inj.fraction == 1.0) {
        epochs.push_back(Epoch{0.0, duration});
        return epochs;
    }
    const double total = inj.fraction * duration;
    std::vector<double> lengths;
    double acc = 0.0;
    std::exponential_distribution<double> exp(1.0 / inj.epoch_mean_length_us);
    while (acc < total) {
        double len = exp(rng);
        if (acc + len >= total) {
            len = total - acc;
        }
        if (len > 0) {
            lengths.push_back(len);
        }
        acc += len;
    }
    // The truncated piece would otherwise always be last.
    std::shuffle(lengths.begin(), lengths.end(), rng);

    const std::size_t k = lengths.size();
    const double free = duration - total - static_cast<double>(k - 1) * min_gap;
    if (free < 0) {
        fail(ErrorCode::kPacking, "correlated epochs do not fit in the record");
    }
    std::uniform_real_distribution<double> u(0.0, free);
    std::vector<double> offsets(k);
    for (auto &o : offsets) {
        o = u(rng);
    }
    std::sort(offsets.begin(), offsets.end());
    double used = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double start = offsets[i] + used;
        epochs.push_back(Epoch{start, start + lengths[i]});
        used += lengths[i] + min_gap;
    }
    return epochs;
}

}  // namespace

CorrelatedPair sample_correlated_pair(const TelegraphConfig &ca, const TelegraphConfig &cb,
                                      const CorrelationInjection &inj, std::uint64_t seed) {
    ca.validate();
    cb.validate();
    if (ca.sample_period_us != cb.sample_period_us || ca.bin_count() != cb.bin_count()) {
        fail(ErrorCode::kInvalidInput, "paired configs must share sample period and duration");
    }
    inj.validate(ca.sample_period_us);
    const std::size_t bins = ca.bin_count();
    const double duration = ca.sample_period_us * static_cast<double>(bins);

    Rng epoch_rng(derive_seed(seed, 0xE0, 0));
    CorrelatedPair out;
    out.epochs = place_epochs(inj, duration, ca.sample_period_us, epoch_rng);

    Walker a{Rng(derive_seed(seed, 0xA0, 0)), rates_from_t1(ca.t1_us, ca.p_e), QubitState::kGround, 0.0, {}};
    Walker b{Rng(derive_seed(seed, 0xB0, 0)), rates_from_t1(cb.t1_us, cb.p_e), QubitState::kGround, 0.0, {}};
    Walker shared{Rng(derive_seed(seed, 0x50, 0)),
                  rates_from_t1(inj.correlated_t1_us, inj.correlated_p_e.value_or(ca.p_e)),
                  QubitState::kGround, 0.0, {}};
    a.state = ca.initial_state ? *ca.initial_state : draw_state(a.rng, ca.p_e);
    b.state = cb.initial_state ? *cb.initial_state : draw_state(b.rng, cb.p_e);
    if (!out.epochs.empty() && out.epochs.front().start_us == 0.0) {
        b.state = a.state;
    }
    out.a.initial_state = a.state;
    out.b.initial_state = b.state;
    a.redraw(0.0);
    b.redraw(0.0);

    // Epochs are entered at the first instant the devices agree, reached by
    // their own free jumps, so neither trajectory receives a jump it did not
    // draw itself. Later epochs are pushed back if a wait overruns them.
    std::vector<Epoch> realized;
    bool shared_at_end = false;
    double earliest = 0.0;
    for (const Epoch &planned : out.epochs) {
        double start = std::max(planned.start_us, earliest);
        if (start >= duration) {
            break;
        }
        a.run_until(start);
        b.run_until(start);
        while (a.state != b.state && start < duration) {
            Walker &first = a.next_jump <= b.next_jump ? a : b;
            start = first.next_jump;
            if (start >= duration) {
                break;
            }
            first.run_until(std::nextafter(start, std::numeric_limits<double>::infinity()));
            (&first == &a ? b : a).run_until(start);
        }
        if (start >= duration) {
            break;
        }
        const double end = std::min(start + (planned.end_us - planned.start_us), duration);
        realized.push_back(Epoch{start, end});
        shared.state = a.state;
        shared.jumps.clear();
        shared.redraw(start);
        shared.run_until(end);
        a.jumps.insert(a.jumps.end(), shared.jumps.begin(), shared.jumps.end());
        b.jumps.insert(b.jumps.end(), shared.jumps.begin(), shared.jumps.end());
        a.state = b.state = shared.state;
        if (end >= duration) {
            shared_at_end = true;
            break;
        }
        a.redraw(end);
        b.redraw(end);
        earliest = end + ca.sample_period_us;
    }
    out.epochs = std::move(realized);
    if (shared_at_end) {
        a.next_jump = b.next_jump = shared.next_jump;
    } else {
        a.run_until(duration);
        b.run_until(duration);
    }

    auto emit = [&](Walker &w, TelegraphTrajectory &t) {
        t.sample_period_us = ca.sample_period_us;
        t.jump_times_us = std::move(w.jumps);
        t.end_jump_time_us = w.next_jump;
        finish_trajectory(t, bins);
    };
    emit(a, out.a);
    emit(b, out.b);
    return out;
}

std::vector<double> epoch_run_lengths_us(const CorrelatedPair &pair) {
    std::vector<double> out;
    for (const TelegraphTrajectory *t : {&pair.a, &pair.b}) {
        const double sp = t->sample_period_us;
        std::size_t start = 0;
        std::size_t e = 0;
        for (std::size_t k = 1; k <= t->states.size(); ++k) {
            if (k < t->states.size() && t->states[k] == t->states[start]) {
                continue;
            }
            const double lo = static_cast<double>(start) * sp;
            const double hi = static_cast<double>(k) * sp;
            while (e < pair.epochs.size() && pair.epochs[e].end_us <= lo) {
                ++e;
            }
            if (e < pair.epochs.size() && pair.epochs[e].start_us < hi) {
                out.push_back(hi - lo);
            }
            start = k;
        }
    }
    return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double inverse_normal_cdf(double p) {
    if (!(p > 0 && p < 1)) {
        fail(ErrorCode::kInvalidInput, "inverse normal CDF needs 0 < p < 1");
    }
    // Acklam's rational approximation (relative error < 1.2e-9).
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 1 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        const double q = std::sqrt(-2 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // One Halley step against the erfc-based CDF.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2 * constants::kPi) * std::exp(x * x / 2);
    return x - u / (1 + x * u / 2);
}

double sigma_for_fidelity(double target_fidelity, double separation) {
    if (!(separation > 0)) {
        fail(ErrorCode::kInvalidInput, "peak separation must be positive");
    }
    if (!(target_fidelity > 0.5 && target_fidelity < 1.0)) {
        fail(ErrorCode::kInfeasible, "target fidelity must lie in (0.5, 1)");
    }
    return separation / (2.0 * inverse_normal_cdf(target_fidelity));
}

double ReadoutModel::separation() const {
    return std::hypot(mean_e.i - mean_g.i, mean_e.q - mean_g.q);
}

void ReadoutModel::validate() const {
    if (!(separation() > 0)) {
        fail(ErrorCode::kInvalidInput, "readout means must differ");
    }
    if (!(sigma > 0) || !std::isfinite(sigma)) {
        fail(ErrorCode::kInvalidInput, "readout sigma must be positive");
    }
}

IQRecord synthesize_iq(std::span<const QubitState> states, double sample_period_us,
                       const ReadoutModel &r, std::uint64_t seed) {
    r.validate();
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    IQRecord out;
    out.sample_period_us = sample_period_us;
    out.iq.resize(2 * states.size());
    for (std::size_t t = 0; t < states.size(); ++t) {
        const IQPoint &m = states[t] == QubitState::kGround ? r.mean_g : r.mean_e;
        const double zi = noise(rng);
        const double zq = noise(rng);
        out.iq[2 * t] = static_cast<float>(m.i + r.sigma * zi);
        out.iq[2 * t + 1] = static_cast<float>(m.q + r.sigma * zq);
    }
    return out;
}

IQRecord synthesize_iq(const TelegraphTrajectory &t, const ReadoutModel &r, std::uint64_t seed) {
    return synthesize_iq(t.states, t.sample_period_us, r, seed);
}

std::uint64_t Histogram2D::in_range() const {
    std::uint64_t s = 0;
    for (auto c : counts) {
        s += c;
    }
    return s;
}

Histogram2D histogram2d(std::span<const IQRecord> records, std::size_t bins_i, std::size_t bins_q,
                        const HistogramRange &range) {
    if (bins_i < 2 || bins_q < 2) {
        fail(ErrorCode::kInvalidInput, "histogram needs at least 2 bins per axis");
    }
    if (!(range.i_max > range.i_min) || !(range.q_max > range.q_min)) {
        fail(ErrorCode::kInvalidInput, "histogram range is degenerate");
    }
    Histogram2D h;
    h.bins_i = bins_i;
    h.bins_q = bins_q;
    h.range = range;
    h.counts.assign(bins_i * bins_q, 0);
    const double wi = h.bin_width_i();
    const double wq = h.bin_width_q();
    auto bin_of = [](double x, double lo, double hi, double w, std::size_t n) -> std::ptrdiff_t {
        if (!(x >= lo && x <= hi)) {
            return -1;
        }
        const auto b = static_cast<std::size_t>((x - lo) / w);
        return static_cast<std::ptrdiff_t>(std::min(b, n - 1));
    };
    for (const IQRecord &rec : records) {
        for (std::size_t t = 0; t < rec.size(); ++t) {
            const auto bi = bin_of(rec.i(t), range.i_min, range.i_max, wi, bins_i);
            const auto bq = bin_of(rec.q(t), range.q_min, range.q_max, wq, bins_q);
            if (bi < 0 || bq < 0) {
                ++h.overflow;
            } else {
                ++h.counts[static_cast<std::size_t>(bi) * bins_q + static_cast<std::size_t>(bq)];
            }
        }
    }
    return h;
}

double occupation_standard_error(double p_e, double t1_us, double sample_period_us,
                                 std::size_t samples_per_record, std::size_t records) {
    if (samples_per_record == 0 || records == 0) {
        fail(ErrorCode::kInvalidInput, "need at least one sample and one record");
    }
    const double rho = std::exp(-sample_period_us / t1_us);
    const double n = static_cast<double>(samples_per_record);
    // sum_{k=1}^{n-1} (n - k) rho^k
    double lagged = 0.0;
    double rk = rho;
    for (std::size_t k = 1; k < samples_per_record && rk > 1e-18; ++k) {
        lagged += (n - static_cast<double>(k)) * rk;
        rk *= rho;
    }
    const double var = p_e * (1 - p_e) * (n + 2 * lagged) / (n * n);
    return std::sqrt(var / static_cast<double>(records));
}

}  // namespace qjump
