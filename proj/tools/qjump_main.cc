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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qjump/error.h"
#include "qjump/io.h"
#include "qjump/pipeline.h"

namespace {

namespace fs = std::filesystem;

enum ExitCode : int {
    kOk = 0,
    kOther = 1,
    kValidation = 2,
    kDependency = 3,
    kNumerical = 4,
};

int exit_code_for(qjump::ErrorCode code) {
    using qjump::ErrorCode;
    switch (code) {
        case ErrorCode::kValidation:
        case ErrorCode::kInvalidInput:
        case ErrorCode::kInfeasible:
        case ErrorCode::kNegativeTemperature:
        case ErrorCode::kPacking:
        case ErrorCode::kTruncationUnsafe:
        case ErrorCode::kInvalidPeaks:
            return kValidation;
        case ErrorCode::kDependency:
        case ErrorCode::kFormat:
        case ErrorCode::kCorruption:
        case ErrorCode::kVersion:
            return kDependency;
        case ErrorCode::kNumerical:
        case ErrorCode::kUnderdetermined:
        case ErrorCode::kUnresolvablePeaks:
        case ErrorCode::kInsufficientStatistics:
        case ErrorCode::kUndefinedCorrelation:
            return kNumerical;
        case ErrorCode::kIo:
            return kOther;
    }
    return kOther;
}

struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string stages;
    std::size_t threads = 1;
};

void add_common(CLI::App *cmd, CommonFlags &f, bool needs_config) {
    auto *config = cmd->add_option("--config", f.config, "Experiment config file");
    if (needs_config) {
        config->required()->check(CLI::ExistingFile);
    }
    cmd->add_option("--out", f.out, "Run directory")->required();
    cmd->add_option("--seed", f.seed, "Override the config's master seed");
    cmd->add_option("--stages", f.stages, "Comma-separated stages, or 'all'");
    cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void print_manifest(const qjump::RunManifest &m) {
    std::cout << "config sha256 " << m.config_sha256 << "\nseed " << m.seed << "\n";
    for (const auto &s : m.stages) {
        std::cout << qjump::stage_name(s.stage) << ": " << s.outputs.size() << " files, " << s.seconds << " s\n";
    }
}

int report(const CommonFlags &f) {
    const fs::path dir(f.out);
    const auto manifest = qjump::RunManifest::from_json(qjump::read_file(dir / "manifest.json"));
    print_manifest(manifest);
    for (const char *name : {"threshold_report.txt", "spectrum/fit.txt"}) {
        if (fs::exists(dir / name)) {
            std::cout << "\n" << name << ":\n" << qjump::read_file(dir / name);
        }
    }
    if (fs::exists(dir / "covariance.csv")) {
        const std::string text = qjump::read_file(dir / "covariance.csv");
        const auto fit = text.find("# fit");
        std::cout << "\ncovariance.csv: "
                  << (fit == std::string::npos ? std::string("no fit\n") : text.substr(fit + 2));
    }
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Correlated quantum-jump simulation and analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qjump::tool_version());

    struct Command {
        const char *name;
        const char *help;
        const char *stages;
    };
    const Command commands[] = {
        {"spectrum", "Fluxonium spectra and optional spectroscopy fit", "spectrum"},
        {"simulate", "Simulate trajectory pairs and synthesize I/Q records", "simulate,synthesize"},
        {"filter", "Filter I/Q records into state traces and dwell series", "filter,dwell"},
        {"analyze", "Normalized covariance of the dwell series", "covariance"},
        {"calibrate", "Detection-threshold calibration", "calibrate"},
        {"run", "Run the selected stages (default: all)", "all"},
    };
    CommonFlags flags;
    std::string chosen_stages;
    for (const auto &c : commands) {
        auto *cmd = app.add_subcommand(c.name, c.help);
        add_common(cmd, flags, true);
        cmd->callback([&, stages = std::string(c.stages)] { chosen_stages = stages; });
    }
    auto *report_cmd = app.add_subcommand("report", "Summarize a run directory");
    add_common(report_cmd, flags, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (report_cmd->parsed()) {
            return report(flags);
        }
        qjump::RunOptions options;
        options.config_path = flags.config;
        options.out_dir = flags.out;
        options.seed = flags.seed;
        options.threads = flags.threads;
        options.stages = qjump::parse_stages(flags.stages.empty() ? chosen_stages : flags.stages);
        print_manifest(qjump::run_pipeline(options));
        return kOk;
    } catch (const qjump::Error &e) {
        std::cerr << "error (" << qjump::error_code_name(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
}
