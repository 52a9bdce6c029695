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

#ifndef QJUMP_PIPELINE_H_
#define QJUMP_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qjump/correlation.h"

namespace qjump {

/// Pipeline stages in execution order.
enum class Stage { kSpectrum, kSimulate, kSynthesize, kFilter, kDwell, kCovariance, kCalibrate };

const char *stage_name(Stage s);
/// Comma-separated stage names, or "all". Throws kValidation.
std::vector<Stage> parse_stages(std::string_view list);

std::string sha256_hex(std::string_view bytes);
const char *tool_version();

struct OutputFile {
    /// Relative to the run directory, '/' separated.
    std::string path;
    std::string sha256;
};

struct StageRecord {
    Stage stage;
    double seconds = 0.0;
    std::vector<OutputFile> outputs;
};

struct RunManifest {
    std::string config_sha256;
    std::string tool_version;
    std::uint64_t seed = 0;
    std::vector<StageRecord> stages;
    /// Per-dataset seeds of the simulate and synthesize stages.
    std::vector<DatasetSeeds> dataset_seeds;
    /// Calibrate-stage ensemble seeds: (fraction or -1 for null, seed).
    std::vector<std::pair<double, std::uint64_t>> ensemble_seeds;

    const StageRecord *find(Stage s) const;
    std::string to_json() const;
    /// Throws kFormat on malformed input.
    static RunManifest from_json(std::string_view text);
};

struct RunOptions {
    std::filesystem::path config_path;
    std::filesystem::path out_dir;
    std::vector<Stage> stages;
    /// Replaces the config's master seed.
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
};

/// Runs the selected stages in order, writing into out_dir, and writes
/// manifest.json last. Stage records from an earlier run in the same
/// directory are kept when its config digest and seed match; otherwise
/// they are discarded and their outputs are not trusted. A stage whose
/// upstream outputs are absent throws kDependency.
///
/// Layout:
///   spectrum/device_{a,b}.csv, spectrum/fit.txt
///   datasets/NNNNN/trajectory_{a,b}.csv (+ .jumps.txt)
///   datasets/NNNNN/iq_{a,b}.iqr
///   datasets/NNNNN/states_{a,b}.csv
///   datasets/NNNNN/dwell_{a,b}.csv
///   covariance.csv
///   threshold_report.txt
RunManifest run_pipeline(const RunOptions &options);

}  // namespace qjump

#endif
