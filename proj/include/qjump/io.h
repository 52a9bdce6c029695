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

#ifndef QJUMP_IO_H_
#define QJUMP_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qjump/correlation.h"
#include "qjump/fluxonium.h"
#include "qjump/jump_simulator.h"
#include "qjump/state_estimator.h"

namespace qjump {

// ---------------------------------------------------------------------------
// Files

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file. Throws kIo.
void write_file_atomic(const std::filesystem::path &path, std::string_view bytes);
std::string read_file(const std::filesystem::path &path);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

// ---------------------------------------------------------------------------
// IQR1 binary records
//
// Layout, little-endian:
//   0   char[4]  magic "IQR1"
//   4   u32      version (1)
//   8   u64      sample count
//   16  u64      sample period, ns
//   24  u8[8]    reserved, zero
//   32  f32[2 * count]  interleaved I, Q

inline constexpr std::uint32_t kIqrVersion = 1;
inline constexpr std::size_t kIqrHeaderSize = 32;

/// Throws kInvalidInput if the sample period is not a positive whole number
/// of nanoseconds or the payload has odd length.
std::string encode_iqr(const IQRecord &record);
/// Throws kFormat on bad magic, kVersion on a version mismatch and
/// kCorruption when the payload length disagrees with the header.
IQRecord decode_iqr(std::string_view bytes);
void write_iqr(const std::filesystem::path &path, const IQRecord &record);
IQRecord read_iqr(const std::filesystem::path &path);

// ---------------------------------------------------------------------------
// Text formats. Every writer emits a header line and '\n' line endings.

/// `bin_index,state` with state 0 (g) or 1 (e).
std::string states_csv(std::span<const QubitState> states);
/// Inverse of states_csv. Throws kFormat.
std::vector<QubitState> parse_states_csv(std::string_view text);

/// Trajectory companion: header lines `sample_period_us=`, `initial_state=`,
/// `end_jump_time_us=`, then one jump time per line.
std::string jump_times_text(const TelegraphTrajectory &t);
/// Rebuilds a trajectory (states included) from the companion file.
TelegraphTrajectory parse_jump_times_text(std::string_view text, std::size_t bins);

/// `bin_index,tau_us,boundary_flag`.
std::string dwell_series_csv(const DwellSeries &d);
DwellSeries parse_dwell_series_csv(std::string_view text, double sample_period_us);

/// `delta_t_us,c,stderr`, plus trailing `# fit amplitude=... decay_time_us=...`
/// when the curve carries a fit.
std::string covariance_csv(const CovarianceCurve &c);

/// `fraction,amplitude,amplitude_err,detected` rows, then `null_floor=` and
/// `smallest_detected=` (a fraction or `none`).
std::string threshold_report_text(const ThresholdReport &r);

/// `phi_ext,f01_ghz`.
std::string spectrum_csv(std::span<const SpectrumPoint> points);
std::vector<SpectrumPoint> parse_spectrum_csv(std::string_view text);

/// `e_j_ghz=`, `e_c_ghz=`, `e_l_ghz=`, `flux_offset=` lines.
std::string fitted_params_text(const SpectrumFit &fit);

}  // namespace qjump

#endif
