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

#include "qjump/io.h"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "qjump/error.h"

namespace qjump {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path &path, std::string_view bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            fail(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            fail(ErrorCode::kIo, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(ErrorCode::kIo, "cannot rename onto " + path.string());
    }
}

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::kIo, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double x) {
    std::array<char, 32> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

namespace {

void put_u32(std::string &s, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) {
        s.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
    }
}

void put_u64(std::string &s, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) {
        s.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
    }
}

std::uint64_t get_le(std::string_view s, std::size_t offset, int bytes) {
    std::uint64_t v = 0;
    for (int k = 0; k < bytes; ++k) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[offset + k])) << (8 * k);
    }
    return v;
}

}  // namespace

std::string encode_iqr(const IQRecord &record) {
    const double ns = record.sample_period_us * 1000.0;
    if (!(ns >= 1.0) || ns != std::round(ns) || ns > 1e18) {
        fail(ErrorCode::kInvalidInput, "sample period must be a positive whole number of nanoseconds");
    }
    if (record.iq.size() % 2 != 0) {
        fail(ErrorCode::kInvalidInput, "interleaved I/Q payload has odd length");
    }
    std::string out = "IQR1";
    out.reserve(kIqrHeaderSize + 4 * record.iq.size());
    put_u32(out, kIqrVersion);
    put_u64(out, record.size());
    put_u64(out, static_cast<std::uint64_t>(ns));
    put_u64(out, 0);
    for (float f : record.iq) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof bits);
        put_u32(out, bits);
    }
    return out;
}

IQRecord decode_iqr(std::string_view bytes) {
    if (bytes.size() < 4 || bytes.substr(0, 4) != "IQR1") {
        fail(ErrorCode::kFormat, "missing IQR1 magic");
    }
    if (bytes.size() < kIqrHeaderSize) {
        fail(ErrorCode::kCorruption, "truncated IQR1 header");
    }
    const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
    if (version != kIqrVersion) {
        fail(ErrorCode::kVersion, "unsupported IQR1 version " + std::to_string(version));
    }
    const std::uint64_t count = get_le(bytes, 8, 8);
    const std::uint64_t ns = get_le(bytes, 16, 8);
    const std::size_t payload = bytes.size() - kIqrHeaderSize;
    if (count > payload / 8 || payload != count * 8) {
        fail(ErrorCode::kCorruption, "IQR1 header declares " + std::to_string(count) + " samples but payload holds " +
                                         std::to_string(payload / 8.0));
    }
    if (ns == 0) {
        fail(ErrorCode::kFormat, "IQR1 sample period is zero");
    }
    IQRecord r;
    r.sample_period_us = static_cast<double>(ns) / 1000.0;
    r.iq.resize(2 * count);
    for (std::size_t k = 0; k < r.iq.size(); ++k) {
        const auto bits = static_cast<std::uint32_t>(get_le(bytes, kIqrHeaderSize + 4 * k, 4));
        std::memcpy(&r.iq[k], &bits, sizeof bits);
    }
    return r;
}

void write_iqr(const fs::path &path, const IQRecord &record) { write_file_atomic(path, encode_iqr(record)); }

IQRecord read_iqr(const fs::path &path) { return decode_iqr(read_file(path)); }

namespace {

// Splits into lines, dropping a trailing '\r' and blank lines.
std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!line.empty()) {
            out.push_back(line);
        }
        pos = end + 1;
    }
    return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t end = line.find(sep, pos);
        out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        if (end == std::string_view::npos) {
            return out;
        }
        pos = end + 1;
    }
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        // from_chars rejects "inf"; accept it for open-ended dwell ends.
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        fail(ErrorCode::kFormat, "not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::uint64_t parse_uint(std::string_view s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        fail(ErrorCode::kFormat, "not an unsigned integer: '" + std::string(s) + "'");
    }
    return v;
}

void expect_header(const std::vector<std::string_view> &lines, std::string_view header) {
    if (lines.empty() || lines.front() != header) {
        fail(ErrorCode::kFormat, "expected header '" + std::string(header) + "'");
    }
}

std::vector<std::string_view> row(std::string_view line, std::size_t fields, std::size_t index) {
    auto f = split(line, ',');
    if (f.size() != fields) {
        fail(ErrorCode::kFormat, "row has " + std::to_string(f.size()) + " fields, expected " + std::to_string(fields));
    }
    if (parse_uint(f[0]) != index) {
        fail(ErrorCode::kFormat, "bin index out of sequence at row " + std::to_string(index));
    }
    return f;
}

QubitState parse_state(std::string_view s) {
    if (s == "0") return QubitState::kGround;
    if (s == "1") return QubitState::kExcited;
    fail(ErrorCode::kFormat, "state must be 0 or 1, got '" + std::string(s) + "'");
}

char state_char(QubitState s) { return s == QubitState::kExcited ? '1' : '0'; }

}  // namespace

std::string states_csv(std::span<const QubitState> states) {
    std::string out = "bin_index,state\n";
    out.reserve(out.size() + states.size() * 8);
    for (std::size_t k = 0; k < states.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += state_char(states[k]);
        out += '\n';
    }
    return out;
}

std::vector<QubitState> parse_states_csv(std::string_view text) {
    const auto lines = lines_of(text);
    expect_header(lines, "bin_index,state");
    std::vector<QubitState> out;
    out.reserve(lines.size() - 1);
    for (std::size_t k = 1; k < lines.size(); ++k) {
        out.push_back(parse_state(row(lines[k], 2, k - 1)[1]));
    }
    return out;
}

std::string jump_times_text(const TelegraphTrajectory &t) {
    std::string out = "sample_period_us=" + format_double(t.sample_period_us) + "\n";
    out += "initial_state=";
    out += state_char(t.initial_state);
    out += "\nend_jump_time_us=" + format_double(t.end_jump_time_us) + "\n";
    for (double j : t.jump_times_us) {
        out += format_double(j);
        out += '\n';
    }
    return out;
}

TelegraphTrajectory parse_jump_times_text(std::string_view text, std::size_t bins) {
    const auto lines = lines_of(text);
    if (lines.size() < 3) {
        fail(ErrorCode::kFormat, "jump-time file is missing its header lines");
    }
    auto value = [&](std::size_t k, std::string_view key) {
        if (lines[k].substr(0, key.size()) != key) {
            fail(ErrorCode::kFormat, "expected '" + std::string(key) + "'");
        }
        return lines[k].substr(key.size());
    };
    TelegraphTrajectory t;
    t.sample_period_us = parse_double(value(0, "sample_period_us="));
    t.initial_state = parse_state(value(1, "initial_state="));
    t.end_jump_time_us = parse_double(value(2, "end_jump_time_us="));
    for (std::size_t k = 3; k < lines.size(); ++k) {
        t.jump_times_us.push_back(parse_double(lines[k]));
    }
    t.states.resize(bins);
    t.states = bin_states(t);
    return t;
}

std::string dwell_series_csv(const DwellSeries &d) {
    std::string out = "bin_index,tau_us,boundary_flag\n";
    for (std::size_t k = 0; k < d.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += format_double(d.tau_us[k]);
        out += ',';
        out += d.boundary[k] ? '1' : '0';
        out += '\n';
    }
    return out;
}

DwellSeries parse_dwell_series_csv(std::string_view text, double sample_period_us) {
    const auto lines = lines_of(text);
    expect_header(lines, "bin_index,tau_us,boundary_flag");
    DwellSeries d;
    d.sample_period_us = sample_period_us;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto f = row(lines[k], 3, k - 1);
        d.tau_us.push_back(parse_double(f[1]));
        const auto flag = parse_uint(f[2]);
        if (flag > 1) {
            fail(ErrorCode::kFormat, "boundary flag must be 0 or 1");
        }
        d.boundary.push_back(static_cast<std::uint8_t>(flag));
    }
    return d;
}

std::string covariance_csv(const CovarianceCurve &c) {
    std::string out = "delta_t_us,c,stderr\n";
    for (std::size_t k = 0; k < c.delta_t_us.size(); ++k) {
        out += format_double(c.delta_t_us[k]) + ',' + format_double(c.c[k]) + ',' +
               format_double(c.standard_error[k]) + '\n';
    }
    if (c.fit) {
        out += "# fit amplitude=" + format_double(c.fit->amplitude) +
               " decay_time_us=" + format_double(c.fit->decay_time) + '\n';
    }
    return out;
}

std::string threshold_report_text(const ThresholdReport &r) {
    std::string out = "fraction,amplitude,amplitude_err,detected\n";
    for (const auto &f : r.results) {
        out += format_double(f.fraction) + ',' + format_double(f.median_amplitude) + ',' +
               format_double(f.amplitude_error) + ',' + (f.detected ? '1' : '0') + '\n';
    }
    out += "null_floor=" + format_double(r.null_floor) + '\n';
    out += "smallest_detected=" + (r.smallest_detected ? format_double(*r.smallest_detected) : "none") + '\n';
    return out;
}

std::string spectrum_csv(std::span<const SpectrumPoint> points) {
    std::string out = "phi_ext,f01_ghz\n";
    for (const auto &p : points) {
        out += format_double(p.phi_ext) + ',' + format_double(p.f01) + '\n';
    }
    return out;
}

std::vector<SpectrumPoint> parse_spectrum_csv(std::string_view text) {
    const auto lines = lines_of(text);
    expect_header(lines, "phi_ext,f01_ghz");
    std::vector<SpectrumPoint> out;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto f = split(lines[k], ',');
        if (f.size() != 2) {
            fail(ErrorCode::kFormat, "spectrum row needs 2 fields");
        }
        out.push_back({parse_double(f[0]), parse_double(f[1])});
    }
    return out;
}

std::string fitted_params_text(const SpectrumFit &fit) {
    return "e_j_ghz=" + format_double(fit.params.e_j) + "\ne_c_ghz=" + format_double(fit.params.e_c) +
           "\ne_l_ghz=" + format_double(fit.params.e_l) + "\nflux_offset=" + format_double(fit.flux_offset) + '\n';
}

}  // namespace qjump
