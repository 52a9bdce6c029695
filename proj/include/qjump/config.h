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

#ifndef QJUMP_CONFIG_H_
#define QJUMP_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qjump/correlation.h"
#include "qjump/fluxonium.h"
#include "qjump/jump_simulator.h"
#include "qjump/state_estimator.h"

namespace qjump {

/// Flat `[section]` / `key = value` text. '#' and ';' start comments; keys
/// and section names are case-sensitive. Duplicate keys are rejected.
class IniDocument {
   public:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool used = false;
    };

    static IniDocument parse(std::string_view text);

    bool has_section(const std::string &section) const;
    const Entry *find(const std::string &section, const std::string &key) const;
    /// Field paths ("section.key") of entries never looked up.
    std::vector<std::string> unused() const;
    std::vector<std::string> sections() const;

   private:
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

struct DeviceConfig {
    double t1_us = 100.0;
    /// Either given directly or derived from temperature and f01.
    double p_e = 0.0;
    std::optional<double> f01_ghz;
    std::optional<double> temperature_mk;
    std::optional<FluxoniumParams> fluxonium;
    double phi_ext = 0.5;
    bool non_thermal = false;
};

struct MonitoringConfig {
    double sample_period_us = 5.0;
    double duration_us = 20480.0;
    std::size_t datasets = 2000;
};

struct InjectionConfig {
    /// Fractions tested by the calibrate stage.
    std::vector<double> fractions;
    /// Fraction injected into the per-dataset simulate stage.
    double simulate_fraction = 0.0;
    CorrelationInjection injection;
};

enum class PeakSource {
    /// Peaks placed at the configured readout means.
    kExact,
    /// Peaks estimated from a histogram of each device's synthesized records.
    kEstimated,
};

struct AnalysisConfig {
    double lag_min_us = -2000.0;
    double lag_max_us = 2000.0;
    double lag_step_us = 5.0;
    FilterOptions filter;
    PeakSource peaks = PeakSource::kExact;
    StatesSource states_source = StatesSource::kFiltered;
    MeanMode mean_mode = MeanMode::kTimeResolved;
    double null_percentile = 95.0;
    std::size_t null_ensembles = 20;
    std::size_t ensembles_per_fraction = 1;

    std::vector<double> lags() const { return lag_grid(lag_min_us, lag_max_us, lag_step_us); }
};

struct SpectrumConfig {
    double phi_min = 0.0;
    double phi_max = 1.0;
    std::size_t points = 101;
    /// Optional measured `phi_ext,f01_ghz` file to fit, relative to the
    /// config file.
    std::optional<std::filesystem::path> data;
    bool fit_flux_offset = true;
};

/// Everything a run needs. The master seed is mandatory.
struct ExperimentConfig {
    DeviceConfig device_a;
    DeviceConfig device_b;
    ReadoutModel readout_a;
    ReadoutModel readout_b;
    MonitoringConfig monitoring;
    InjectionConfig injection;
    AnalysisConfig analysis;
    SpectrumConfig spectrum;
    std::uint64_t seed = 0;

    TelegraphConfig telegraph_a() const;
    TelegraphConfig telegraph_b() const;
    EnsembleSpec ensemble_spec(double fraction) const;
    ThresholdConfig threshold_config(std::size_t threads) const;
};

/// Parses and validates. Every error is kValidation with a message that
/// starts with the offending field path, e.g. "device.a.p_e: ...".
/// `base_dir` resolves relative paths.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path &base_dir = {});
ExperimentConfig load_config(const std::filesystem::path &path);

}  // namespace qjump

#endif
