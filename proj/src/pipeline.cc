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

#include "qjump/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>

#include "json.hpp"
#include "qjump/config.h"
#include "qjump/error.h"
#include "qjump/io.h"
#include "qjump/parallel.h"

#ifndef QJUMP_VERSION
#define QJUMP_VERSION "unknown"
#endif

namespace qjump {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr Stage kAllStages[] = {Stage::kSpectrum, Stage::kSimulate,   Stage::kSynthesize, Stage::kFilter,
                                Stage::kDwell,    Stage::kCovariance, Stage::kCalibrate};

}  // namespace

const char *stage_name(Stage s) {
    switch (s) {
        case Stage::kSpectrum: return "spectrum";
        case Stage::kSimulate: return "simulate";
        case Stage::kSynthesize: return "synthesize";
        case Stage::kFilter: return "filter";
        case Stage::kDwell: return "dwell";
        case Stage::kCovariance: return "covariance";
        case Stage::kCalibrate: return "calibrate";
    }
    return "unknown";
}

std::vector<Stage> parse_stages(std::string_view list) {
    if (list == "all") {
        return {std::begin(kAllStages), std::end(kAllStages)};
    }
    std::vector<bool> chosen(std::size(kAllStages), false);
    std::size_t pos = 0;
    while (pos <= list.size()) {
        std::size_t end = list.find(',', pos);
        if (end == std::string_view::npos) {
            end = list.size();
        }
        const std::string_view name = list.substr(pos, end - pos);
        bool found = false;
        for (std::size_t k = 0; k < std::size(kAllStages); ++k) {
            if (name == stage_name(kAllStages[k])) {
                chosen[k] = found = true;
            }
        }
        if (!found) {
            fail(ErrorCode::kValidation, "stages: unknown stage '" + std::string(name) + "'");
        }
        pos = end + 1;
    }
    std::vector<Stage> out;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        if (chosen[k]) {
            out.push_back(kAllStages[k]);
        }
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        fail(ErrorCode::kNumerical, "SHA-256 digest failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < length; ++k) {
        out.push_back(hex[digest[k] >> 4]);
        out.push_back(hex[digest[k] & 0xF]);
    }
    return out;
}

const char *tool_version() { return QJUMP_VERSION; }

const StageRecord *RunManifest::find(Stage s) const {
    for (const auto &r : stages) {
        if (r.stage == s) {
            return &r;
        }
    }
    return nullptr;
}

std::string RunManifest::to_json() const {
    json j;
    j["config_sha256"] = config_sha256;
    j["tool_version"] = tool_version;
    j["seed"] = seed;
    j["stages"] = json::array();
    for (const auto &r : stages) {
        json s;
        s["name"] = stage_name(r.stage);
        s["seconds"] = r.seconds;
        s["outputs"] = json::array();
        for (const auto &o : r.outputs) {
            s["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}});
        }
        j["stages"].push_back(std::move(s));
    }
    j["dataset_seeds"] = json::array();
    for (const auto &d : dataset_seeds) {
        j["dataset_seeds"].push_back({{"pair", d.pair}, {"readout_a", d.readout_a}, {"readout_b", d.readout_b}});
    }
    j["ensemble_seeds"] = json::array();
    for (const auto &[fraction, seed] : ensemble_seeds) {
        j["ensemble_seeds"].push_back({{"fraction", fraction}, {"seed", seed}});
    }
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        RunManifest m;
        m.config_sha256 = j.at("config_sha256").get<std::string>();
        m.tool_version = j.at("tool_version").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        for (const auto &s : j.at("stages")) {
            StageRecord r;
            const auto name = s.at("name").get<std::string>();
            r.stage = parse_stages(name).at(0);
            r.seconds = s.at("seconds").get<double>();
            for (const auto &o : s.at("outputs")) {
                r.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
            }
            m.stages.push_back(std::move(r));
        }
        for (const auto &d : j.at("dataset_seeds")) {
            m.dataset_seeds.push_back({d.at("pair").get<std::uint64_t>(), d.at("readout_a").get<std::uint64_t>(),
                                       d.at("readout_b").get<std::uint64_t>()});
        }
        for (const auto &e : j.at("ensemble_seeds")) {
            m.ensemble_seeds.emplace_back(e.at("fraction").get<double>(), e.at("seed").get<std::uint64_t>());
        }
        return m;
    } catch (const json::exception &e) {
        fail(ErrorCode::kFormat, std::string("malformed manifest: ") + e.what());
    } catch (const Error &e) {
        fail(ErrorCode::kFormat, std::string("malformed manifest: ") + e.what());
    }
}

namespace {

std::string dataset_dir(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "datasets/%05zu", k);
    return buf;
}

class RunContext {
   public:
    RunContext(const RunOptions &options, ExperimentConfig config, RunManifest manifest)
        : options_(options), config_(std::move(config)), manifest_(std::move(manifest)) {}

    const ExperimentConfig &config() const { return config_; }
    std::size_t datasets() const { return config_.monitoring.datasets; }
    std::size_t threads() const { return options_.threads; }
    RunManifest &manifest() { return manifest_; }

    fs::path full(const std::string &rel) const { return options_.out_dir / rel; }

    OutputFile write(const std::string &rel, std::string_view bytes) const {
        const fs::path p = full(rel);
        fs::create_directories(p.parent_path());
        write_file_atomic(p, bytes);
        return {rel, sha256_hex(bytes)};
    }

    /// Reads an upstream output; absent files are dependency errors.
    std::string read_upstream(Stage producer, const std::string &rel) const {
        const fs::path p = full(rel);
        if (!manifest_.find(producer) || !fs::exists(p)) {
            fail(ErrorCode::kDependency, std::string("missing output of stage '") + stage_name(producer) +
                                             "': " + p.string());
        }
        return read_file(p);
    }

    void require(Stage producer) const {
        if (!manifest_.find(producer)) {
            fail(ErrorCode::kDependency,
                 std::string("stage '") + stage_name(producer) + "' has not been run in " + options_.out_dir.string());
        }
    }

   private:
    const RunOptions &options_;
    ExperimentConfig config_;
    RunManifest manifest_;
};

using Outputs = std::vector<OutputFile>;

// Runs fn for every dataset, each returning its own outputs, and
// concatenates them in dataset order.
template <typename F>
Outputs per_dataset(RunContext &ctx, F &&fn) {
    std::vector<Outputs> slots(ctx.datasets());
    parallel_for(ctx.datasets(), ctx.threads(), [&](std::size_t k) { slots[k] = fn(k); });
    Outputs out;
    for (auto &s : slots) {
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

Outputs run_spectrum(RunContext &ctx) {
    const auto &c = ctx.config();
    const auto &s = c.spectrum;
    std::vector<FluxPoint> grid(s.points);
    for (std::size_t k = 0; k < s.points; ++k) {
        grid[k].phi_ext = s.phi_min + (s.phi_max - s.phi_min) * static_cast<double>(k) /
                                          static_cast<double>(s.points - 1);
    }
    const FluxoniumParams pa = c.device_a.fluxonium.value_or(device_a_defaults());
    const FluxoniumParams pb = c.device_b.fluxonium.value_or(device_b_defaults());
    Outputs out;
    out.push_back(ctx.write("spectrum/device_a.csv", spectrum_csv(spectrum_sweep(pa, grid, ctx.threads()))));
    out.push_back(ctx.write("spectrum/device_b.csv", spectrum_csv(spectrum_sweep(pb, grid, ctx.threads()))));
    if (s.data) {
        std::string text;
        try {
            text = read_file(*s.data);
        } catch (const Error &) {
            fail(ErrorCode::kDependency, "spectroscopy data not found: " + s.data->string());
        }
        const auto data = parse_spectrum_csv(text);
        const SpectrumFit fit = fit_spectrum(data, pa, s.fit_flux_offset);
        out.push_back(ctx.write("spectrum/fit.txt", fitted_params_text(fit)));
    }
    return out;
}

Outputs run_simulate(RunContext &ctx) {
    const auto &c = ctx.config();
    const EnsembleSpec spec = c.ensemble_spec(c.injection.simulate_fraction);
    return per_dataset(ctx, [&](std::size_t k) {
        const DatasetSeeds seeds = dataset_seeds(spec.seed, k);
        const CorrelatedPair pair = sample_correlated_pair(spec.device_a, spec.device_b, spec.injection, seeds.pair);
        const std::string dir = dataset_dir(k);
        return Outputs{ctx.write(dir + "/trajectory_a.csv", states_csv(pair.a.states)),
                       ctx.write(dir + "/trajectory_a.jumps.txt", jump_times_text(pair.a)),
                       ctx.write(dir + "/trajectory_b.csv", states_csv(pair.b.states)),
                       ctx.write(dir + "/trajectory_b.jumps.txt", jump_times_text(pair.b))};
    });
}

Outputs run_synthesize(RunContext &ctx) {
    const auto &c = ctx.config();
    const std::size_t bins = c.telegraph_a().bin_count();
    return per_dataset(ctx, [&](std::size_t k) {
        const DatasetSeeds seeds = dataset_seeds(c.seed, k);
        const std::string dir = dataset_dir(k);
        Outputs out;
        for (const char *side : {"a", "b"}) {
            const bool is_a = side[0] == 'a';
            const auto t = parse_jump_times_text(
                ctx.read_upstream(Stage::kSimulate, dir + "/trajectory_" + side + ".jumps.txt"), bins);
            const IQRecord r = synthesize_iq(t, is_a ? c.readout_a : c.readout_b,
                                             is_a ? seeds.readout_a : seeds.readout_b);
            out.push_back(ctx.write(dir + "/iq_" + side + ".iqr", encode_iqr(r)));
        }
        return out;
    });
}

Outputs run_filter(RunContext &ctx) {
    const auto &c = ctx.config();
    ctx.require(Stage::kSynthesize);
    auto load = [&](std::size_t k, const char *side) {
        return decode_iqr(ctx.read_upstream(Stage::kSynthesize, dataset_dir(k) + "/iq_" + side + ".iqr"));
    };
    PeakModel peaks_a = PeakModel::from_readout(c.readout_a);
    PeakModel peaks_b = PeakModel::from_readout(c.readout_b);
    if (c.analysis.peaks == PeakSource::kEstimated) {
        for (const char *side : {"a", "b"}) {
            std::vector<IQRecord> records(ctx.datasets());
            parallel_for(ctx.datasets(), ctx.threads(), [&](std::size_t k) { records[k] = load(k, side); });
            (side[0] == 'a' ? peaks_a : peaks_b) = estimate_peaks(records, true);
        }
    }
    return per_dataset(ctx, [&](std::size_t k) {
        Outputs out;
        for (const char *side : {"a", "b"}) {
            const StateTrace trace =
                two_point_filter(load(k, side), side[0] == 'a' ? peaks_a : peaks_b, c.analysis.filter);
            out.push_back(ctx.write(dataset_dir(k) + "/states_" + side + ".csv", states_csv(trace.states)));
        }
        return out;
    });
}

Outputs run_dwell(RunContext &ctx) {
    const auto &c = ctx.config();
    ctx.require(Stage::kFilter);
    const double sp = c.monitoring.sample_period_us;
    return per_dataset(ctx, [&](std::size_t k) {
        Outputs out;
        for (const char *side : {"a", "b"}) {
            const std::string dir = dataset_dir(k);
            StateTrace trace{parse_states_csv(ctx.read_upstream(Stage::kFilter, dir + "/states_" + side + ".csv")), sp};
            out.push_back(ctx.write(dir + "/dwell_" + side + ".csv", dwell_series_csv(dwell_series(trace))));
        }
        return out;
    });
}

Outputs run_covariance(RunContext &ctx) {
    const auto &c = ctx.config();
    ctx.require(Stage::kDwell);
    const double sp = c.monitoring.sample_period_us;
    const auto lags = c.analysis.lags();
    CovarianceAccumulator acc(c.telegraph_a().bin_count(), sp, lags, ctx.datasets());
    parallel_for(ctx.datasets(), ctx.threads(), [&](std::size_t k) {
        const std::string dir = dataset_dir(k);
        const auto a = parse_dwell_series_csv(ctx.read_upstream(Stage::kDwell, dir + "/dwell_a.csv"), sp);
        const auto b = parse_dwell_series_csv(ctx.read_upstream(Stage::kDwell, dir + "/dwell_b.csv"), sp);
        acc.set(k, a.tau_us, b.tau_us);
    });
    CovarianceCurve curve = acc.finish(c.analysis.mean_mode, ctx.threads());
    try {
        fit_covariance_decay(curve);
    } catch (const Error &) {
        curve.fit.reset();  // the curve is still worth writing
    }
    return {ctx.write("covariance.csv", covariance_csv(curve))};
}

Outputs run_calibrate(RunContext &ctx) {
    const auto &c = ctx.config();
    const ThresholdConfig tc = c.threshold_config(ctx.threads());
    auto &seeds = ctx.manifest().ensemble_seeds;
    seeds.clear();
    for (std::size_t e = 0; e < tc.null_ensembles; ++e) {
        seeds.emplace_back(-1.0, threshold_ensemble_seed(tc.seed, std::nullopt, e));
    }
    std::vector<double> fractions = tc.fractions;
    std::sort(fractions.begin(), fractions.end());
    for (std::size_t j = 0; j < fractions.size(); ++j) {
        for (std::size_t e = 0; e < tc.ensembles_per_fraction; ++e) {
            seeds.emplace_back(fractions[j], threshold_ensemble_seed(tc.seed, j, e));
        }
    }
    return {ctx.write("threshold_report.txt", threshold_report_text(detection_threshold(tc)))};
}

}  // namespace

RunManifest run_pipeline(const RunOptions &options) {
    std::string config_bytes;
    try {
        config_bytes = read_file(options.config_path);
    } catch (const Error &e) {
        fail(ErrorCode::kValidation, std::string("config: ") + e.what());
    }
    ExperimentConfig config = parse_config(config_bytes, options.config_path.parent_path());
    if (options.seed) {
        config.seed = *options.seed;
    }
    if (options.threads == 0) {
        fail(ErrorCode::kValidation, "threads: must be at least 1");
    }

    RunManifest manifest;
    manifest.config_sha256 = sha256_hex(config_bytes);
    manifest.tool_version = tool_version();
    manifest.seed = config.seed;
    const fs::path manifest_path = options.out_dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        // Earlier stage records remain valid only for the same config and seed.
        try {
            RunManifest previous = RunManifest::from_json(read_file(manifest_path));
            if (previous.config_sha256 == manifest.config_sha256 && previous.seed == manifest.seed) {
                manifest = std::move(previous);
                manifest.tool_version = tool_version();
            }
        } catch (const Error &) {
        }
    }
    fs::create_directories(options.out_dir);

    RunContext ctx(options, std::move(config), std::move(manifest));
    const std::size_t n = ctx.datasets();
    for (Stage stage : kAllStages) {
        if (std::find(options.stages.begin(), options.stages.end(), stage) == options.stages.end()) {
            continue;
        }
        // Downstream records describe outputs derived from the old ones.
        auto &records = ctx.manifest().stages;
        records.erase(std::remove_if(records.begin(), records.end(),
                                     [&](const StageRecord &r) { return r.stage > stage; }),
                      records.end());
        const auto t0 = std::chrono::steady_clock::now();
        Outputs outputs;
        switch (stage) {
            case Stage::kSpectrum: outputs = run_spectrum(ctx); break;
            case Stage::kSimulate: outputs = run_simulate(ctx); break;
            case Stage::kSynthesize: outputs = run_synthesize(ctx); break;
            case Stage::kFilter: outputs = run_filter(ctx); break;
            case Stage::kDwell: outputs = run_dwell(ctx); break;
            case Stage::kCovariance: outputs = run_covariance(ctx); break;
            case Stage::kCalibrate: outputs = run_calibrate(ctx); break;
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        auto &stages = ctx.manifest().stages;
        stages.erase(std::remove_if(stages.begin(), stages.end(), [&](const StageRecord &r) { return r.stage == stage; }),
                     stages.end());
        stages.push_back({stage, seconds, std::move(outputs)});
        std::sort(stages.begin(), stages.end(),
                  [](const StageRecord &a, const StageRecord &b) { return a.stage < b.stage; });
        if (stage == Stage::kSimulate || stage == Stage::kSynthesize) {
            auto &ds = ctx.manifest().dataset_seeds;
            ds.clear();
            for (std::size_t k = 0; k < n; ++k) {
                ds.push_back(dataset_seeds(ctx.config().seed, k));
            }
        }
    }
    write_file_atomic(manifest_path, ctx.manifest().to_json());
    return ctx.manifest();
}

}  // namespace qjump
