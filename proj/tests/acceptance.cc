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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "qjump/config.h"
#include "qjump/correlation.h"
#include "qjump/fluxonium.h"
#include "qjump/io.h"
#include "qjump/jump_simulator.h"
#include "qjump/pipeline.h"
#include "qjump/state_estimator.h"

namespace qjump {
namespace {

namespace fs = std::filesystem;

// Criterion 1.
constexpr double kPopulationTol = 0.001;
constexpr double kTemperatureRelTol = 1e-6;
// Criteria 2-4.
constexpr std::size_t kTrajectories = 2000;
constexpr double kMeanDwellE = 125.8;
constexpr double kMeanDwellG = 487.8;
constexpr double kSigmas = 3.0;
constexpr double kT1RelTol = 0.05;
constexpr double kMinFidelity = 0.94;
constexpr std::size_t kHistogramRecords = 20;
constexpr double kHistogramRecordUs = 20000.0;  // 4000 samples, 80,000 in total
// Criterion 5.
constexpr double kRatioTarget = 3.0;
constexpr double kRatioRelTol = 0.30;
constexpr double kDecayFactor = 2.0;
constexpr std::size_t kEpochRunPairs = 400;
// Criterion 6.
constexpr double kEdgeLow = 0.5;
constexpr double kEdgeHigh = 2.0;
constexpr double kDecisiveErrors = 2.0;
// Criterion 7.
constexpr int kOracleCases = 200;
constexpr double kExactTol = 1e-12;
// Criterion 8.
constexpr double kFrequencyTol = 0.001;
constexpr double kSymmetryTol = 1e-9;
constexpr double kOracleTol = 1e-5;
constexpr double kConvergenceTol = 1e-6;
constexpr double kFitRelTol = 0.005;
constexpr double kInductanceTol = 0.0005;

const fs::path kSourceDir = QJUMP_SOURCE_DIR;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double mean_of(const std::vector<double> &v) {
    double s = 0;
    for (double x : v) {
        s += x;
    }
    return s / double(v.size());
}

double standard_error(const std::vector<double> &v) {
    const double m = mean_of(v);
    double ss = 0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / double(v.size() - 1) / double(v.size()));
}

void equilibrium(Outcome &o) {
    const double pa = equilibrium_population(0.565, 20.0);
    const double pb = equilibrium_population(0.579, 25.0);
    o.detail << "p_e(A)=" << fmt(pa) << " p_e(B)=" << fmt(pb);
    o.check(std::abs(pa - 0.205) <= kPopulationTol, "device A population");
    o.check(std::abs(pb - 0.248) <= kPopulationTol, "device B population");
    const double ta = effective_temperature_mk(pa, 0.565);
    const double tb = effective_temperature_mk(pb, 0.579);
    o.detail << " T_eff=" << fmt(ta, 9) << "," << fmt(tb, 9) << " mK";
    o.check(std::abs(ta / 20.0 - 1) <= kTemperatureRelTol, "device A temperature inversion");
    o.check(std::abs(tb / 25.0 - 1) <= kTemperatureRelTol, "device B temperature inversion");
}

TelegraphConfig device_a(std::uint64_t seed) {
    TelegraphConfig c;
    c.t1_us = 100.0;
    c.p_e = 0.205;
    c.sample_period_us = 5.0;
    c.duration_us = 20480.0;
    c.seed = seed;
    return c;
}

void dwell_statistics(Outcome &o) {
    std::vector<double> g, e;
    DwellTally binned;
    for (std::size_t k = 0; k < kTrajectories; ++k) {
        const auto t = sample_trajectory(device_a(1000 + k));
        const auto d = dwell_lengths(t);
        g.insert(g.end(), d.ground.begin(), d.ground.end());
        e.insert(e.end(), d.excited.begin(), d.excited.end());
        binned.add(t.states, t.sample_period_us);
    }
    const double me = mean_of(e), se_e = standard_error(e);
    const double mg = mean_of(g), se_g = standard_error(g);
    const auto est = estimate_t1(binned);
    o.detail << "e " << fmt(me) << "+-" << fmt(se_e, 2) << " us (n=" << e.size() << "), g " << fmt(mg) << "+-"
             << fmt(se_g, 2) << " us (n=" << g.size() << "), t1 from 5 us bins " << fmt(est.t1_us) << " us";
    o.check(std::abs(me - kMeanDwellE) < kSigmas * se_e, "excited mean dwell");
    o.check(std::abs(mg - kMeanDwellG) < kSigmas * se_g, "ground mean dwell");
    o.check(std::abs(est.t1_us / 100.0 - 1) <= kT1RelTol, "t1 estimate");
}

ReadoutModel standard_readout() {
    return ReadoutModel{{0.0, 0.0}, {1.0, 0.0}, sigma_for_fidelity(0.95, 1.0)};
}

void readout_chain(Outcome &o) {
    const ReadoutModel r = standard_readout();
    const PeakModel peaks = PeakModel::from_readout(r);
    std::size_t agree = 0, total = 0;
    double worst = 1.0;
    for (std::size_t k = 0; k < kTrajectories; ++k) {
        const auto t = sample_trajectory(device_a(5000 + k));
        const auto est = two_point_filter(synthesize_iq(t, r, 9000 + k), peaks);
        const double f = readout_fidelity(t.states, est.states);
        worst = std::min(worst, f);
        agree += static_cast<std::size_t>(std::llround(f * double(t.states.size())));
        total += t.states.size();
    }
    const double fidelity = double(agree) / double(total);
    o.detail << "fidelity " << fmt(fidelity) << " (worst record " << fmt(worst) << ")";
    o.check(fidelity >= kMinFidelity, "sample fidelity");

    std::vector<IQRecord> records;
    for (std::size_t k = 0; k < kHistogramRecords; ++k) {
        TelegraphConfig c = device_a(700 + k);
        c.duration_us = kHistogramRecordUs;
        records.push_back(synthesize_iq(sample_trajectory(c), r, 800 + k));
    }
    const std::size_t per_record = records[0].size();
    const auto p = estimate_peaks(records);
    const double p_e = 1.0 - p.weight_g;
    const double se = std::hypot(p.weight_g_error, occupation_standard_error(0.205, 100.0, 5.0, per_record,
                                                                            kHistogramRecords));
    const double split = std::abs(p.mu_e - p.mu_g) / std::max(p.sigma_g, p.sigma_e);
    o.detail << "; peaks " << per_record * kHistogramRecords << " counts, separation " << fmt(split, 3)
             << " sigma, p_e " << fmt(p_e) << "+-" << fmt(se, 2);
    o.check(per_record * kHistogramRecords == 80000, "histogram size");
    o.check(split > 2.0, "two resolvable peaks");
    o.check(std::abs(p_e - 0.205) < kSigmas * se, "peak weights");
}

void null_result(Outcome &o, const ExperimentConfig &cfg) {
    const EnsembleSpec spec = cfg.ensemble_spec(0.0);
    const std::size_t n = spec.datasets;
    const double sp = spec.device_a.sample_period_us;
    const PeakModel pa = PeakModel::from_readout(spec.readout_a);
    const PeakModel pb = PeakModel::from_readout(spec.readout_b);
    DatasetEnsemble ensemble;
    ensemble.a.resize(n);
    ensemble.b.resize(n);
    std::vector<StateTrace> sa(n), sb(n);
    for (std::size_t k = 0; k < n; ++k) {
        const DatasetSeeds seeds = dataset_seeds(spec.seed, k);
        const auto pair = sample_correlated_pair(spec.device_a, spec.device_b, spec.injection, seeds.pair);
        sa[k] = two_point_filter(synthesize_iq(pair.a, spec.readout_a, seeds.readout_a), pa, spec.filter);
        sb[k] = two_point_filter(synthesize_iq(pair.b, spec.readout_b, seeds.readout_b), pb, spec.filter);
        ensemble.a[k] = dwell_series(sa[k]);
        ensemble.b[k] = dwell_series(sb[k]);
    }
    const auto lags = cfg.analysis.lags();
    const auto curve = normalized_covariance(ensemble, lags, cfg.analysis.mean_mode);
    double worst_c = 0;
    std::size_t worst_k = 0;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const double z = std::abs(curve.c[k]) / curve.standard_error[k];
        if (z > worst_c) {
            worst_c = z;
            worst_k = k;
        }
    }
    const auto r = state_correlation(sa, sb, lags);
    double worst_r = 0;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        worst_r = std::max(worst_r, std::abs(r.r[k]) * std::sqrt(r.effective_samples[k]));
    }
    o.detail << n << " datasets, " << lags.size() << " lags: max |C|/se " << fmt(worst_c, 3) << " at "
             << fmt(lags[worst_k]) << " us; max |r| sqrt(N_eff) " << fmt(worst_r, 3) << " (inflation "
             << fmt(r.variance_inflation, 3) << ")";
    o.check(worst_c < kSigmas, "covariance within 3 se");
    o.check(worst_r < kSigmas, "state correlation within 3/sqrt(N_eff)");
}

const FractionResult *find_fraction(const ThresholdReport &rep, double f) {
    for (const auto &r : rep.results) {
        if (std::abs(r.fraction - f) < 1e-12) {
            return &r;
        }
    }
    return nullptr;
}

double realized_epoch_dwell(const ExperimentConfig &cfg, double fraction) {
    const EnsembleSpec spec = cfg.ensemble_spec(fraction);
    std::vector<double> runs;
    for (std::size_t k = 0; k < kEpochRunPairs; ++k) {
        const auto pair = sample_correlated_pair(spec.device_a, spec.device_b, spec.injection,
                                                 dataset_seeds(spec.seed ^ 0x5eed, k).pair);
        const auto r = epoch_run_lengths_us(pair);
        runs.insert(runs.end(), r.begin(), r.end());
    }
    return mean_of(runs);
}

void injection_curves(Outcome &o, const ExperimentConfig &cfg, const ThresholdReport &rep) {
    const FractionResult *one = find_fraction(rep, 0.01);
    const FractionResult *three = find_fraction(rep, 0.03);
    o.check(one && three, "1% and 3% fractions configured");
    if (!one || !three) {
        return;
    }
    const double ratio = three->median_amplitude / one->median_amplitude;
    const double dwell = realized_epoch_dwell(cfg, 0.03);
    o.detail << "median A(1%)=" << fmt(one->median_amplitude) << " A(3%)=" << fmt(three->median_amplitude)
             << " ratio " << fmt(ratio, 3) << "; tau(1%)=" << fmt(one->median_decay_time_us) << " tau(3%)="
             << fmt(three->median_decay_time_us) << " us vs epoch dwell " << fmt(dwell) << " us (model "
             << fmt(correlated_mean_dwell_us(cfg.injection.injection, cfg.device_a.p_e)) << ")";
    o.check(one->median_amplitude > 0 && three->median_amplitude > 0, "positive amplitudes");
    o.check(std::abs(ratio / kRatioTarget - 1) <= kRatioRelTol, "amplitude ratio");
    for (const FractionResult *f : {one, three}) {
        const double q = f->median_decay_time_us / dwell;
        o.check(q >= 1 / kDecayFactor && q <= kDecayFactor, "decay time at " + fmt(f->fraction));
    }
}

void detection_threshold_check(Outcome &o, const ThresholdReport &rep) {
    const FractionResult *half = find_fraction(rep, 0.005);
    const FractionResult *one = find_fraction(rep, 0.01);
    o.check(half && one, "0.5% and 1% fractions configured");
    if (!half || !one) {
        return;
    }
    const double edge = half->median_amplitude / rep.null_floor;
    const double margin = (one->median_amplitude - rep.null_floor) / one->amplitude_error;
    o.detail << "null floor " << fmt(rep.null_floor) << " (" << rep.null_amplitudes.size()
             << " nulls); 0.5% median/floor " << fmt(edge, 3) << "; 1% median " << fmt(one->median_amplitude)
             << ", (median-floor)/se " << fmt(margin, 3);
    o.check(edge >= kEdgeLow && edge <= kEdgeHigh, "0.5% at the edge of detectability");
    o.check(margin > kDecisiveErrors, "1% clears the floor decisively");
}

std::vector<double> symmetric_lags(long half) {
    std::vector<double> out;
    for (long l = -half; l <= half; ++l) {
        out.push_back(double(l));
    }
    return out;
}

DwellSeries series(const std::vector<double> &tau) {
    DwellSeries s;
    s.tau_us = tau;
    s.boundary.assign(tau.size(), 0);
    s.sample_period_us = 1.0;
    return s;
}

void covariance_oracle(Outcome &o) {
    const std::pair<MeanMode, oracle::Normalization> modes[] = {
        {MeanMode::kGrand, oracle::Normalization::kGrand},
        {MeanMode::kPerDataset, oracle::Normalization::kPerDataset},
        {MeanMode::kTimeResolved, oracle::Normalization::kTimeResolved}};
    std::mt19937_64 rng(5150);
    std::uniform_int_distribution<int> len(4, 64);
    std::uniform_int_distribution<int> sets(2, 5);
    std::uniform_real_distribution<double> tau(1.0, 80.0);
    double worst = 0, worst_sym = 0, worst_scale = 0;
    for (int trial = 0; trial < kOracleCases; ++trial) {
        const int n = len(rng);
        const int count = sets(rng);
        std::vector<std::vector<double>> a(count), b(count);
        DatasetEnsemble e, swapped, scaled;
        for (int k = 0; k < count; ++k) {
            for (int t = 0; t < n; ++t) {
                a[k].push_back(tau(rng));
                b[k].push_back(tau(rng));
            }
            e.a.push_back(series(a[k]));
            e.b.push_back(series(b[k]));
            auto sa = a[k];
            for (double &v : sa) {
                v *= 4.3;
            }
            scaled.a.push_back(series(sa));
            scaled.b.push_back(series(b[k]));
        }
        swapped.a = e.b;
        swapped.b = e.a;
        const long half = (n - 1) / 2;
        const auto lags = symmetric_lags(half);
        std::vector<long> ilags;
        for (double l : lags) {
            ilags.push_back(long(l));
        }
        for (const auto &[mode, oracle_mode] : modes) {
            const auto got = normalized_covariance(e, lags, mode);
            const auto want = oracle::brute_covariance(a, b, ilags, oracle_mode);
            const auto ba = normalized_covariance(swapped, lags, mode);
            const auto sc = normalized_covariance(scaled, lags, mode);
            const std::size_t nl = lags.size();
            for (std::size_t k = 0; k < nl; ++k) {
                worst = std::max({worst, std::abs(got.c[k] - want.c[k]),
                                  std::abs(got.standard_error[k] - want.standard_error[k])});
                worst_sym = std::max(worst_sym, std::abs(got.c[k] - ba.c[nl - 1 - k]));
                worst_scale = std::max(worst_scale, std::abs(got.c[k] - sc.c[k]));
            }
        }
    }
    o.detail << kOracleCases << " cases x 3 modes: max |diff| " << fmt(worst, 3) << ", symmetry "
             << fmt(worst_sym, 3) << ", scaling " << fmt(worst_scale, 3);
    o.check(worst <= kExactTol, "brute-force agreement");
    o.check(worst_sym <= kExactTol, "exchange symmetry");
    o.check(worst_scale <= kExactTol, "scaling invariance");
}

void fluxonium_spectrum(Outcome &o) {
    const auto a = device_a_defaults();
    const auto b = device_b_defaults();
    const double fa = transition_frequency(a, {0.5});
    const double fb = transition_frequency(b, {0.5});
    o.detail << "f01 " << fmt(fa * 1000, 6) << "/" << fmt(fb * 1000, 6) << " MHz";
    o.check(std::abs(fa - 0.565) <= kFrequencyTol, "device A f01");
    o.check(std::abs(fb - 0.579) <= kFrequencyTol, "device B f01");

    double periodic = 0, symmetric = 0;
    for (double phi : {0.03, 0.17, 0.29, 0.41, 0.5}) {
        const double f = transition_frequency(a, {phi});
        periodic = std::max(periodic, std::abs(f - transition_frequency(a, {phi + 1.0})));
        symmetric = std::max(symmetric, std::abs(f - transition_frequency(a, {1.0 - phi})));
    }
    o.detail << "; periodicity " << fmt(periodic, 2) << ", symmetry " << fmt(symmetric, 2);
    o.check(periodic <= kSymmetryTol, "flux periodicity");
    o.check(symmetric <= kSymmetryTol, "half-flux symmetry");

    double grid = 0;
    for (const auto &p : {a, b}) {
        for (double phi : {0.5, 0.37, 0.0}) {
            const auto got = energy_levels(p, {phi});
            const auto want = oracle::phase_grid_levels(p.e_j, p.e_c, p.e_l, phi, 5);
            for (std::size_t k = 0; k < 5; ++k) {
                grid = std::max(grid, std::abs((got[k] - got[0]) - (want[k] - want[0])));
                grid = std::max(grid, std::abs(got[k] - want[k]));
            }
        }
    }
    o.detail << "; phase grid " << fmt(grid, 2);
    o.check(grid <= kOracleTol, "phase-grid oracle");

    auto small = a, large = a;
    small.basis_size = 60;
    large.basis_size = 120;
    const double shift = std::abs(transition_frequency(small, {0.5}) - transition_frequency(large, {0.5}));
    o.detail << "; basis 60->120 " << fmt(shift, 2);
    o.check(shift < kConvergenceTol, "basis convergence");

    auto truth = a;
    truth.basis_size = 60;
    std::vector<FluxPoint> flux;
    for (int k = 0; k <= 12; ++k) {
        flux.push_back({0.3 + 0.4 * k / 12.0});
    }
    const auto data = spectrum_sweep(truth, flux);
    auto guess = truth;
    guess.e_j *= 1.15;
    guess.e_c *= 0.9;
    guess.e_l *= 1.1;
    const auto fit = fit_spectrum(data, guess, false);
    const double err = std::max({std::abs(fit.params.e_j / truth.e_j - 1), std::abs(fit.params.e_c / truth.e_c - 1),
                                 std::abs(fit.params.e_l / truth.e_l - 1)});
    const double el = el_from_inductance(455.0);
    o.detail << "; fit rel err " << fmt(err, 2) << "; E_L(455 nH) " << fmt(el, 6) << " GHz";
    o.check(err <= kFitRelTol, "spectrum fit round trip");
    o.check(std::abs(el - 0.3593) <= kInductanceTol, "inductive energy");
}

std::map<std::string, std::string> run_outputs(const fs::path &dir, std::size_t threads) {
    fs::remove_all(dir);
    RunOptions opt;
    opt.config_path = kSourceDir / "configs/small.ini";
    opt.out_dir = dir;
    opt.stages = parse_stages("all");
    opt.threads = threads;
    run_pipeline(opt);
    std::map<std::string, std::string> files;
    for (const auto &e : fs::recursive_directory_iterator(dir)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".csv" || ext == ".iqr")) {
            files[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
        }
    }
    fs::remove_all(dir);
    return files;
}

void determinism(Outcome &o) {
    const fs::path base = fs::temp_directory_path() / "qjump_acceptance";
    const auto one = run_outputs(base / "threads1", 1);
    const auto two = run_outputs(base / "threads2", 2);
    const auto again = run_outputs(base / "threads1_again", 1);
    std::size_t iqr = 0, differ = 0;
    for (const auto &[path, bytes] : one) {
        iqr += path.ends_with(".iqr");
        auto it = two.find(path);
        auto jt = again.find(path);
        differ += it == two.end() || it->second != bytes || jt == again.end() || jt->second != bytes;
    }
    o.detail << one.size() << " files (" << iqr << " IQR1), " << differ << " differ";
    o.check(!one.empty() && iqr > 0, "outputs produced");
    o.check(one.size() == two.size() && one.size() == again.size(), "same file set");
    o.check(differ == 0, "byte-identical outputs");
}

}  // namespace
}  // namespace qjump

int main() {
    using namespace qjump;
    const auto start = std::chrono::steady_clock::now();
    bool all = true;
    auto criterion = [&](int number, const char *name, const std::function<void(Outcome &)> &fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            fn(o);
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail << " [error: " << e.what() << "]";
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d %s: %s (%.1f s) %s\n", number, name, o.pass ? "PASS" : "FAIL", s,
                    o.detail.str().c_str());
        std::fflush(stdout);
        all = all && o.pass;
    };

    const ExperimentConfig cfg = load_config(kSourceDir / "configs/full.ini");
    criterion(1, "equilibrium physics", equilibrium);
    criterion(2, "dwell statistics", dwell_statistics);
    criterion(3, "readout chain", readout_chain);
    criterion(4, "null result", [&](Outcome &o) { null_result(o, cfg); });

    ThresholdReport report;
    std::string calibrate_error;
    try {
        report = detection_threshold(cfg.threshold_config(1));
    } catch (const std::exception &e) {
        calibrate_error = e.what();
    }
    auto with_report = [&](auto fn) {
        return [&, fn](Outcome &o) {
            if (!calibrate_error.empty()) {
                throw std::runtime_error("calibration failed: " + calibrate_error);
            }
            fn(o);
        };
    };
    criterion(5, "injection curves", with_report([&](Outcome &o) { injection_curves(o, cfg, report); }));
    criterion(6, "detection threshold", with_report([&](Outcome &o) { detection_threshold_check(o, report); }));
    criterion(7, "covariance oracle", covariance_oracle);
    criterion(8, "fluxonium spectrum", fluxonium_spectrum);
    criterion(9, "determinism", determinism);

    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("acceptance: %s (%.0f s)\n", all ? "PASS" : "FAIL", total);
    return all ? 0 : 1;
}
