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

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "oracles.h"
#include "qjump/error.h"

namespace qjump {
namespace {

ErrorCode code_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::kIo;
}

DwellSeries series(std::vector<double> tau, double sample_period = 1.0) {
    DwellSeries d;
    d.boundary.assign(tau.size(), 0);
    d.tau_us = std::move(tau);
    d.sample_period_us = sample_period;
    return d;
}

std::vector<double> symmetric_lags(long half) {
    std::vector<double> lags;
    for (long k = -half; k <= half; ++k) {
        lags.push_back(double(k));
    }
    return lags;
}

oracle::Normalization to_oracle(MeanMode m) {
    switch (m) {
        case MeanMode::kGrand:
            return oracle::Normalization::kGrand;
        case MeanMode::kPerDataset:
            return oracle::Normalization::kPerDataset;
        case MeanMode::kTimeResolved:
            break;
    }
    return oracle::Normalization::kTimeResolved;
}

constexpr MeanMode kModes[] = {MeanMode::kGrand, MeanMode::kPerDataset, MeanMode::kTimeResolved};

TEST(LagGrid, Inclusive) {
    EXPECT_EQ(lag_grid(-10, 10, 5), (std::vector<double>{-10, -5, 0, 5, 10}));
    EXPECT_EQ(lag_grid(0, 0, 5), (std::vector<double>{0}));
    EXPECT_EQ(lag_grid(-2000, 2000, 5).size(), 801u);
}

TEST(NormalizedCovariance, ConstantSeriesGiveZero) {
    DatasetEnsemble e;
    for (int k = 0; k < 3; ++k) {
        e.a.push_back(series(std::vector<double>(32, 40.0)));
        e.b.push_back(series(std::vector<double>(32, 15.0)));
    }
    const auto lags = symmetric_lags(15);
    for (MeanMode m : kModes) {
        const auto c = normalized_covariance(e, lags, m);
        for (std::size_t k = 0; k < lags.size(); ++k) {
            EXPECT_NEAR(c.c[k], 0.0, 1e-15);
            EXPECT_NEAR(c.standard_error[k], 0.0, 1e-15);
        }
    }
}

TEST(NormalizedCovariance, ZeroLagOfIdenticalSeriesIsRelativeVariance) {
    // tau_A = tau_B = x in both datasets: C(0) = <x^2>/<x>^2 - 1 = v / m^2.
    const std::vector<double> x{10, 10, 5, 20, 20, 20, 20, 5};
    DatasetEnsemble e;
    for (int k = 0; k < 2; ++k) {
        e.a.push_back(series(x));
        e.b.push_back(series(x));
    }
    const double m = 110.0 / 8.0;
    double v = 0.0;
    for (double xi : x) {
        v += (xi - m) * (xi - m);
    }
    v /= 8.0;
    const std::vector<double> zero{0.0};
    EXPECT_NEAR(normalized_covariance(e, zero, MeanMode::kGrand).c[0], v / (m * m), 1e-15);
}

TEST(NormalizedCovariance, MatchesBruteForce) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> len(4, 64);
    std::uniform_int_distribution<int> sets(2, 5);
    std::uniform_real_distribution<double> tau(1.0, 50.0);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = len(rng);
        const int count = sets(rng);
        DatasetEnsemble e;
        std::vector<std::vector<double>> a(count);
        std::vector<std::vector<double>> b(count);
        for (int k = 0; k < count; ++k) {
            for (int t = 0; t < n; ++t) {
                a[k].push_back(std::round(tau(rng)));
                b[k].push_back(std::round(tau(rng)));
            }
            e.a.push_back(series(a[k]));
            e.b.push_back(series(b[k]));
        }
        const long half = (n - 1) / 2;
        const auto lags = symmetric_lags(half);
        std::vector<long> ilags;
        for (double l : lags) {
            ilags.push_back(long(l));
        }
        for (MeanMode m : kModes) {
            const auto got = normalized_covariance(e, lags, m);
            const auto want = oracle::brute_covariance(a, b, ilags, to_oracle(m));
            for (std::size_t k = 0; k < lags.size(); ++k) {
                worst = std::max(worst, std::abs(got.c[k] - want.c[k]));
                worst = std::max(worst, std::abs(got.standard_error[k] - want.standard_error[k]));
            }
        }
    }
    EXPECT_LE(worst, 1e-12);
}

DatasetEnsemble random_ensemble(std::uint64_t seed, int count, int n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> tau(1.0, 50.0);
    DatasetEnsemble e;
    for (int k = 0; k < count; ++k) {
        std::vector<double> a(n);
        std::vector<double> b(n);
        for (int t = 0; t < n; ++t) {
            a[t] = tau(rng);
            b[t] = tau(rng);
        }
        e.a.push_back(series(a));
        e.b.push_back(series(b));
    }
    return e;
}

TEST(NormalizedCovariance, ExchangeSymmetryAndScaling) {
    const auto e = random_ensemble(11, 4, 60);
    DatasetEnsemble swapped{e.b, e.a};
    DatasetEnsemble scaled = e;
    for (auto &s : scaled.a) {
        for (auto &v : s.tau_us) {
            v *= 3.7;
        }
    }
    const auto lags = symmetric_lags(29);
    for (MeanMode m : kModes) {
        const auto ab = normalized_covariance(e, lags, m);
        const auto ba = normalized_covariance(swapped, lags, m);
        const auto sc = normalized_covariance(scaled, lags, m);
        const std::size_t nl = lags.size();
        for (std::size_t k = 0; k < nl; ++k) {
            EXPECT_NEAR(ab.c[k], ba.c[nl - 1 - k], 1e-12);
            EXPECT_NEAR(ab.c[k], sc.c[k], 1e-12);
        }
    }
}

TEST(NormalizedCovariance, ThreadCountDoesNotChangeResult) {
    const auto e = random_ensemble(12, 9, 500);
    const auto lags = symmetric_lags(200);
    for (MeanMode m : kModes) {
        const auto one = normalized_covariance(e, lags, m, 1);
        const auto four = normalized_covariance(e, lags, m, 4);
        EXPECT_EQ(one.c, four.c);
        EXPECT_EQ(one.standard_error, four.standard_error);
    }
}

TEST(NormalizedCovariance, Errors) {
    auto e = random_ensemble(13, 2, 20);
    const auto lags = symmetric_lags(3);
    e.a[0].tau_us.assign(20, 0.0);
    e.a[1].tau_us.assign(20, 0.0);
    EXPECT_EQ(code_of([&] { normalized_covariance(e, lags); }), ErrorCode::kInvalidInput);
    auto one = random_ensemble(14, 1, 20);
    EXPECT_EQ(code_of([&] { normalized_covariance(one, lags); }), ErrorCode::kInvalidInput);
    auto ragged = random_ensemble(15, 2, 20);
    ragged.b[1].tau_us.pop_back();
    EXPECT_EQ(code_of([&] { normalized_covariance(ragged, lags); }), ErrorCode::kInvalidInput);
    const auto ok = random_ensemble(16, 2, 20);
    const std::vector<double> too_long{-10, 0, 10};
    EXPECT_EQ(code_of([&] { normalized_covariance(ok, too_long); }), ErrorCode::kInvalidInput);
    const std::vector<double> fractional{0.5};
    EXPECT_EQ(code_of([&] { normalized_covariance(ok, fractional); }), ErrorCode::kInvalidInput);
    const std::vector<double> unsorted{1, 0};
    EXPECT_EQ(code_of([&] { normalized_covariance(ok, unsorted); }), ErrorCode::kInvalidInput);
}

TEST(FitCovarianceDecay, StoresFit) {
    CovarianceCurve c;
    for (int k = -20; k <= 20; ++k) {
        c.delta_t_us.push_back(10.0 * k);
        c.c.push_back(0.02 * std::exp(-std::abs(10.0 * k) / 60.0));
        c.standard_error.push_back(0.0);
    }
    const auto f = fit_covariance_decay(c);
    ASSERT_TRUE(c.fit.has_value());
    EXPECT_NEAR(f.amplitude, 0.02, 1e-8);
    EXPECT_NEAR(c.fit->decay_time, 60.0, 1e-4);
    CovarianceCurve shortc;
    shortc.delta_t_us = {0, 1, 2, 3};
    shortc.c = {1, 1, 1, 1};
    shortc.standard_error = {0, 0, 0, 0};
    EXPECT_THROW(fit_covariance_decay(shortc), Error);
}

StateTrace trace(const std::vector<int> &bits) {
    StateTrace t;
    t.sample_period_us = 1.0;
    for (int b : bits) {
        t.states.push_back(b ? QubitState::kExcited : QubitState::kGround);
    }
    return t;
}

TEST(StateCorrelation, PerfectAndAnti) {
    const auto a = trace({0, 1, 1, 0, 1, 0, 0, 0, 1, 1});
    const auto anti = trace({1, 0, 0, 1, 0, 1, 1, 1, 0, 0});
    const std::vector<double> zero{0.0};
    EXPECT_NEAR(state_correlation(a, a, zero).r[0], 1.0, 1e-15);
    EXPECT_NEAR(state_correlation(a, anti, zero).r[0], -1.0, 1e-15);
    const auto flat = trace({1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    EXPECT_EQ(code_of([&] { state_correlation(a, flat, zero); }), ErrorCode::kUndefinedCorrelation);
}

TEST(StateCorrelation, MatchesPooledPearson) {
    std::mt19937_64 rng(17);
    std::bernoulli_distribution bit(0.3);
    std::vector<StateTrace> a;
    std::vector<StateTrace> b;
    std::vector<std::vector<double>> xa;
    std::vector<std::vector<double>> xb;
    for (int k = 0; k < 3; ++k) {
        std::vector<int> ba(40);
        std::vector<int> bb(40);
        for (int t = 0; t < 40; ++t) {
            ba[t] = bit(rng);
            bb[t] = t > 0 && bit(rng) ? ba[t - 1] : bit(rng);
        }
        a.push_back(trace(ba));
        b.push_back(trace(bb));
        xa.emplace_back(ba.begin(), ba.end());
        xb.emplace_back(bb.begin(), bb.end());
    }
    const auto lags = symmetric_lags(10);
    const auto r1 = state_correlation(a, b, lags, 1);
    const auto r3 = state_correlation(a, b, lags, 3);
    for (std::size_t k = 0; k < lags.size(); ++k) {
        EXPECT_NEAR(r1.r[k], oracle::brute_pearson(xa, xb, long(lags[k])), 1e-12);
        EXPECT_EQ(r1.r[k], r3.r[k]);
        EXPECT_EQ(r1.samples[k], 3.0 * (40 - std::abs(lags[k])));
        EXPECT_LE(r1.effective_samples[k], r1.samples[k] * 1.0000001);
        EXPECT_GT(r1.effective_samples[k], 0.0);
    }
}

TEST(Statistics, MedianAndPercentile) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
    std::vector<double> v;
    for (int k = 1; k <= 20; ++k) {
        v.push_back(k);
    }
    EXPECT_NEAR(percentile(v, 95.0), 19.05, 1e-12);
    EXPECT_EQ(percentile(v, 0.0), 1.0);
    EXPECT_EQ(percentile(v, 100.0), 20.0);
    EXPECT_THROW(percentile(v, 101.0), Error);
}

TEST(Seeds, Distinct) {
    const auto s0 = dataset_seeds(1, 0);
    const auto s1 = dataset_seeds(1, 1);
    EXPECT_NE(s0.pair, s1.pair);
    EXPECT_NE(s0.readout_a, s0.readout_b);
    EXPECT_NE(s0.readout_b, s1.readout_a);
    EXPECT_NE(threshold_ensemble_seed(5, std::nullopt, 0), threshold_ensemble_seed(5, 0, 0));
    EXPECT_NE(threshold_ensemble_seed(5, 0, 1), threshold_ensemble_seed(5, 1, 0));
    EXPECT_EQ(threshold_ensemble_seed(5, 2, 3), threshold_ensemble_seed(5, 2, 3));
}

EnsembleSpec small_spec() {
    EnsembleSpec s;
    s.device_a.p_e = 0.205;
    s.device_b.p_e = 0.248;
    s.device_a.duration_us = s.device_b.duration_us = 2560.0;
    s.readout_a = {{0, 0}, {1, 0}, sigma_for_fidelity(0.95, 1.0)};
    s.readout_b = s.readout_a;
    s.datasets = 12;
    s.seed = 99;
    return s;
}

TEST(SimulateCovariance, DeterministicAcrossThreads) {
    auto s = small_spec();
    s.injection.fraction = 0.1;
    const auto lags = lag_grid(-200, 200, 5);
    for (auto src : {StatesSource::kFiltered, StatesSource::kTruth}) {
        s.source = src;
        const auto one = simulate_covariance(s, lags, MeanMode::kTimeResolved, 1);
        const auto three = simulate_covariance(s, lags, MeanMode::kTimeResolved, 3);
        EXPECT_EQ(one.c, three.c);
    }
}

TEST(SimulateCovariance, FullInjectionGivesPositivePeak) {
    auto s = small_spec();
    s.source = StatesSource::kTruth;
    s.injection.fraction = 1.0;
    s.datasets = 20;
    const auto lags = lag_grid(-500, 500, 5);
    auto c = simulate_covariance(s, lags);
    const auto f = fit_covariance_decay(c);
    EXPECT_GT(f.amplitude, 0.3);
    EXPECT_GT(c.c[100], 0.3);
    EXPECT_GT(c.c[100], c.c[0]);
    EXPECT_GT(c.c[100], c.c[200]);
}

TEST(DetectionThreshold, ReportStructure) {
    ThresholdConfig c;
    c.base = small_spec();
    c.base.datasets = 6;
    c.base.source = StatesSource::kTruth;
    c.fractions = {1.0, 0.05};
    c.ensembles_per_fraction = 2;
    c.null_ensembles = 4;
    c.lags_us = lag_grid(-200, 200, 5);
    c.seed = 3;
    const auto r = detection_threshold(c);
    ASSERT_EQ(r.results.size(), 2u);
    EXPECT_EQ(r.results[0].fraction, 0.05);
    EXPECT_EQ(r.results[1].fraction, 1.0);
    EXPECT_EQ(r.null_amplitudes.size(), 4u);
    std::vector<double> abs_null;
    for (double a : r.null_amplitudes) {
        abs_null.push_back(std::abs(a));
    }
    EXPECT_DOUBLE_EQ(r.null_floor, percentile(abs_null, 95.0));
    for (const auto &f : r.results) {
        EXPECT_EQ(f.amplitudes.size(), 2u);
        EXPECT_DOUBLE_EQ(f.median_amplitude, median(f.amplitudes));
        EXPECT_EQ(f.detected, f.median_amplitude > r.null_floor);
    }
    EXPECT_TRUE(r.results[1].detected);
    ASSERT_TRUE(r.smallest_detected.has_value());
    EXPECT_EQ(*r.smallest_detected, r.results[0].detected ? 0.05 : 1.0);
    c.threads = 2;
    const auto again = detection_threshold(c);
    EXPECT_EQ(again.null_amplitudes, r.null_amplitudes);
    EXPECT_EQ(again.results[1].amplitudes, r.results[1].amplitudes);
}

}  // namespace
}  // namespace qjump
