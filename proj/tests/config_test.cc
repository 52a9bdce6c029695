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

#include "qjump/config.h"

#include <cmath>
#include <string>

#include "gtest/gtest.h"
#include "qjump/error.h"

namespace qjump {
namespace {

const char kBase[] = R"(# comment
[run]
seed = 7

[device.a]
t1_us = 100
p_e = 0.205

[device.b]
t1_us = 100
p_e = 0.248

[readout.a]
target_fidelity = 0.95

[readout.b]
sigma = 0.3

[monitoring]
sample_period_us = 5
duration_us = 2560
datasets = 4

[analysis]
lag_min_us = -100
lag_max_us = 100
)";

std::string replaced(const std::string &from, const std::string &to) {
    std::string text = kBase;
    const auto pos = text.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return text.replace(pos, from.size(), to);
}

// Returns the message of the validation error raised for `text`.
std::string rejection(const std::string &text) {
    try {
        parse_config(text);
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kValidation) << e.what();
        return e.what();
    }
    ADD_FAILURE() << "accepted:\n" << text;
    return "";
}

bool starts_with(const std::string &s, const std::string &prefix) { return s.rfind(prefix, 0) == 0; }

TEST(ConfigTest, ParsesShippedConfigs) {
    const auto full = load_config(std::filesystem::path(QJUMP_SOURCE_DIR) / "configs/full.ini");
    EXPECT_EQ(full.seed, 20170401u);
    EXPECT_EQ(full.monitoring.datasets, 2000u);
    EXPECT_NEAR(full.device_a.p_e, 0.205, 0.002);
    EXPECT_NEAR(full.device_b.p_e, 0.248, 0.002);
    EXPECT_EQ(full.telegraph_a().bin_count(), 4096u);
    EXPECT_EQ(full.analysis.lags().size(), 801u);
    EXPECT_EQ(full.injection.fractions.size(), 3u);
    EXPECT_EQ(full.analysis.mean_mode, MeanMode::kTimeResolved);

    const auto small = load_config(std::filesystem::path(QJUMP_SOURCE_DIR) / "configs/small.ini");
    EXPECT_EQ(small.seed, 7u);
    EXPECT_EQ(small.monitoring.datasets, 16u);
    EXPECT_DOUBLE_EQ(small.injection.simulate_fraction, 0.03);
}

TEST(ConfigTest, Defaults) {
    const auto c = parse_config(kBase);
    EXPECT_DOUBLE_EQ(c.readout_b.sigma, 0.3);
    EXPECT_DOUBLE_EQ(c.readout_a.mean_e.i, 1.0);
    EXPECT_GT(c.readout_a.sigma, 0.0);
    EXPECT_EQ(c.analysis.lags().size(), 41u);
    EXPECT_EQ(c.analysis.null_ensembles, 20u);
    EXPECT_DOUBLE_EQ(c.analysis.null_percentile, 95.0);
    EXPECT_TRUE(c.injection.fractions.empty());
}

TEST(ConfigTest, TemperatureGivesEquilibriumPopulation) {
    const auto c = parse_config(replaced("p_e = 0.205", "f01_ghz = 0.565\ntemperature_mk = 20"));
    EXPECT_NEAR(c.device_a.p_e, 1.0 / (1.0 + std::exp(0.565 / 0.41673)), 0.001);
    EXPECT_NEAR(c.device_a.p_e, 0.205, 0.002);
}

TEST(ConfigTest, MissingSeedIsRejected) {
    EXPECT_TRUE(starts_with(rejection(replaced("seed = 7", "")), "run.seed:"));
}

TEST(ConfigTest, ErrorsNameTheField) {
    struct Case {
        const char *from;
        const char *to;
        const char *path;
    };
    const Case cases[] = {
        {"p_e = 0.205", "p_e = 0.205\ntemperature_mk = 20", "device.a.p_e:"},
        {"p_e = 0.205", "", "device.a.p_e:"},
        {"p_e = 0.248", "p_e = 0.6", "device.b.p_e:"},
        {"p_e = 0.248", "p_e = -0.1", "device.b.p_e:"},
        {"t1_us = 100\np_e = 0.205", "t1_us = 0\np_e = 0.205", "device.a.t1_us:"},
        {"target_fidelity = 0.95", "target_fidelity = 0.95\nsigma = 0.3", "readout.a.sigma:"},
        {"datasets = 4", "datasets = 1", "monitoring.datasets:"},
        {"duration_us = 2560", "duration_us = 2562", "monitoring.duration_us:"},
        {"sample_period_us = 5", "sample_period_us = 0", "monitoring.sample_period_us:"},
        {"seed = 7", "seed = 7\nsed = 8", "run.sed:"},
        {"seed = 7", "seed = 7\nseed = 8", "run.seed:"},
        {"seed = 7", "seed = seven", "run.seed:"},
        {"[run]", "[runn]", "runn:"},
        {"lag_min_us = -100", "lag_min_us = -100\nlag_step_us = 7", "analysis.lag_step_us:"},
        {"lag_max_us = 100", "lag_max_us = -200", "analysis.lag_max_us:"},
        {"lag_max_us = 100", "lag_max_us = 1300", "analysis.lag_min_us:"},
        {"lag_max_us = 100", "lag_max_us = -90", "analysis.lag_step_us:"},
        {"lag_max_us = 100", "lag_max_us = 100\nnull_percentile = 100", "analysis.null_percentile:"},
        {"lag_max_us = 100", "lag_max_us = 100\nthreshold = sideways", "analysis.threshold:"},
        {"lag_max_us = 100", "lag_max_us = 100\n[injection]\nfractions = 0.1, 1.5", "injection.fractions:"},
        {"lag_max_us = 100", "lag_max_us = 100\n[spectrum]\npoints = 1", "spectrum.points:"},
    };
    for (const Case &c : cases) {
        const std::string message = rejection(replaced(c.from, c.to));
        EXPECT_TRUE(starts_with(message, c.path)) << c.to << " -> " << message;
    }
}

TEST(ConfigTest, MissingSectionsAreRejected) {
    EXPECT_TRUE(starts_with(rejection(replaced("[readout.b]\nsigma = 0.3", "")), "readout.b:"));
}

TEST(ConfigTest, UnreadableFileIsValidation) {
    try {
        load_config("/nonexistent/qjump.ini");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kValidation);
        EXPECT_TRUE(starts_with(e.what(), "config:"));
    }
}

}  // namespace
}  // namespace qjump
