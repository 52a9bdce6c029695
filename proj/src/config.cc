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

#include <algorithm>
#include <charconv>
#include <cmath>

#include "qjump/error.h"
#include "qjump/io.h"

namespace qjump {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const std::size_t a = s.find_first_not_of(ws);
    if (a == std::string_view::npos) {
        return {};
    }
    const std::size_t b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

[[noreturn]] void invalid(const std::string &path, const std::string &message) {
    fail(ErrorCode::kValidation, path + ": " + message);
}

}  // namespace

IniDocument IniDocument::parse(std::string_view text) {
    IniDocument doc;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string_view::npos) {
            line = line.substr(0, comment);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') {
                invalid(where, "unterminated section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) {
                invalid(where, "empty section name");
            }
            doc.sections_[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            invalid(where, "expected key = value");
        }
        if (section.empty()) {
            invalid(where, "key outside of any section");
        }
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) {
            invalid(where, "empty key");
        }
        auto &keys = doc.sections_[section];
        if (keys.count(key)) {
            invalid(section + "." + key, "duplicate key (" + where + ")");
        }
        keys[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no};
    }
    return doc;
}

bool IniDocument::has_section(const std::string &section) const { return sections_.count(section) > 0; }

const IniDocument::Entry *IniDocument::find(const std::string &section, const std::string &key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) {
        return nullptr;
    }
    auto k = s->second.find(key);
    if (k == s->second.end()) {
        return nullptr;
    }
    k->second.used = true;
    return &k->second;
}

std::vector<std::string> IniDocument::unused() const {
    std::vector<std::string> out;
    for (const auto &[section, keys] : sections_) {
        for (const auto &[key, entry] : keys) {
            if (!entry.used) {
                out.push_back(section + "." + key);
            }
        }
    }
    return out;
}

std::vector<std::string> IniDocument::sections() const {
    std::vector<std::string> out;
    for (const auto &kv : sections_) {
        out.push_back(kv.first);
    }
    return out;
}

namespace {

// Typed lookups that report errors against "section.key".
class Reader {
   public:
    Reader(const IniDocument &doc, std::string section) : doc_(doc), section_(std::move(section)) {}

    std::string path(const std::string &key) const { return section_ + "." + key; }
    bool has(const std::string &key) const { return doc_.find(section_, key) != nullptr; }

    std::optional<double> number(const std::string &key) const {
        const auto *e = doc_.find(section_, key);
        if (!e) {
            return std::nullopt;
        }
        return to_number(key, e->value);
    }
    double number(const std::string &key, double fallback) const { return number(key).value_or(fallback); }

    std::optional<std::uint64_t> integer(const std::string &key) const {
        const auto *e = doc_.find(section_, key);
        if (!e) {
            return std::nullopt;
        }
        std::uint64_t v = 0;
        const auto &s = e->value;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            invalid(path(key), "expected a non-negative integer, got '" + s + "'");
        }
        return v;
    }

    std::optional<bool> boolean(const std::string &key) const {
        const auto *e = doc_.find(section_, key);
        if (!e) {
            return std::nullopt;
        }
        if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
        if (e->value == "false" || e->value == "0" || e->value == "no") return false;
        invalid(path(key), "expected true or false, got '" + e->value + "'");
    }

    std::optional<std::string> text(const std::string &key) const {
        const auto *e = doc_.find(section_, key);
        if (!e) {
            return std::nullopt;
        }
        return e->value;
    }

    std::vector<double> numbers(const std::string &key) const {
        std::vector<double> out;
        const auto *e = doc_.find(section_, key);
        if (!e) {
            return out;
        }
        std::string_view rest = e->value;
        while (!trim(rest).empty()) {
            const std::size_t comma = rest.find(',');
            out.push_back(to_number(key, std::string(trim(rest.substr(0, comma)))));
            if (comma == std::string_view::npos) {
                break;
            }
            rest = rest.substr(comma + 1);
        }
        return out;
    }

    template <typename Enum>
    Enum choice(const std::string &key, Enum fallback,
                std::initializer_list<std::pair<const char *, Enum>> options) const {
        const auto v = text(key);
        if (!v) {
            return fallback;
        }
        std::string names;
        for (const auto &[name, value] : options) {
            if (*v == name) {
                return value;
            }
            names += names.empty() ? name : std::string(", ") + name;
        }
        invalid(path(key), "expected one of " + names + ", got '" + *v + "'");
    }

   private:
    double to_number(const std::string &key, const std::string &s) const {
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
            invalid(path(key), "expected a finite number, got '" + s + "'");
        }
        return v;
    }

    const IniDocument &doc_;
    std::string section_;
};

// Runs `check` and rewrites any library error as a validation error on
// `path`.
template <typename F>
void checked(const std::string &path, F &&check) {
    try {
        check();
    } catch (const Error &e) {
        if (e.code() == ErrorCode::kValidation) {
            throw;
        }
        invalid(path, e.what());
    }
}

DeviceConfig read_device(const Reader &r) {
    DeviceConfig d;
    d.t1_us = r.number("t1_us", d.t1_us);
    if (!(d.t1_us > 0)) {
        invalid(r.path("t1_us"), "must be positive");
    }
    d.non_thermal = r.boolean("non_thermal").value_or(false);
    d.phi_ext = r.number("phi_ext", d.phi_ext);
    const bool any_circuit = r.has("e_j_ghz") || r.has("e_c_ghz") || r.has("e_l_ghz") || r.has("inductance_nh");
    if (any_circuit) {
        FluxoniumParams p;
        for (const char *key : {"e_j_ghz", "e_c_ghz"}) {
            if (!r.has(key)) {
                invalid(r.path(key), "required when any circuit parameter is given");
            }
        }
        p.e_j = *r.number("e_j_ghz");
        p.e_c = *r.number("e_c_ghz");
        if (r.has("e_l_ghz") == r.has("inductance_nh")) {
            invalid(r.path("e_l_ghz"), "give exactly one of e_l_ghz or inductance_nh");
        }
        if (r.has("e_l_ghz")) {
            p.e_l = *r.number("e_l_ghz");
        } else {
            const double nh = *r.number("inductance_nh");
            checked(r.path("inductance_nh"), [&] { p.e_l = el_from_inductance(nh); });
        }
        if (auto n = r.integer("basis_size")) {
            p.basis_size = static_cast<int>(std::min<std::uint64_t>(*n, 1u << 20));
        }
        checked(r.path("e_j_ghz"), [&] { p.validate(); });
        d.fluxonium = p;
    }
    d.f01_ghz = r.number("f01_ghz");
    d.temperature_mk = r.number("temperature_mk");
    const auto p_e = r.number("p_e");
    if (p_e && d.temperature_mk) {
        invalid(r.path("p_e"), "give either p_e or temperature_mk, not both");
    }
    if (p_e) {
        d.p_e = *p_e;
    } else if (d.temperature_mk) {
        if (!(*d.temperature_mk > 0)) {
            invalid(r.path("temperature_mk"), "must be positive");
        }
        if (!d.f01_ghz) {
            if (!d.fluxonium) {
                invalid(r.path("f01_ghz"), "needed with temperature_mk unless circuit parameters are given");
            }
            checked(r.path("phi_ext"), [&] { d.f01_ghz = transition_frequency(*d.fluxonium, {d.phi_ext}); });
        }
        if (!(*d.f01_ghz > 0)) {
            invalid(r.path("f01_ghz"), "must be positive");
        }
        d.p_e = equilibrium_population(*d.f01_ghz, *d.temperature_mk);
    } else {
        invalid(r.path("p_e"), "give p_e or temperature_mk");
    }
    if (!(d.p_e >= 0 && d.p_e < 1)) {
        invalid(r.path("p_e"), "must lie in [0, 1)");
    }
    if (d.p_e >= 0.5 && !d.non_thermal) {
        invalid(r.path("p_e"), "values of 0.5 or more need non_thermal = true");
    }
    return d;
}

ReadoutModel read_readout(const Reader &r) {
    ReadoutModel m;
    m.mean_g = {r.number("mean_g_i", 0.0), r.number("mean_g_q", 0.0)};
    m.mean_e = {r.number("mean_e_i", 1.0), r.number("mean_e_q", 0.0)};
    const auto sigma = r.number("sigma");
    const auto fidelity = r.number("target_fidelity");
    if (sigma.has_value() == fidelity.has_value()) {
        invalid(r.path("sigma"), "give exactly one of sigma or target_fidelity");
    }
    if (sigma) {
        m.sigma = *sigma;
    } else {
        checked(r.path("target_fidelity"), [&] { m.sigma = sigma_for_fidelity(*fidelity, m.separation()); });
    }
    checked(r.path("sigma"), [&] { m.validate(); });
    return m;
}

}  // namespace

TelegraphConfig ExperimentConfig::telegraph_a() const {
    TelegraphConfig c;
    c.t1_us = device_a.t1_us;
    c.p_e = device_a.p_e;
    c.non_thermal = device_a.non_thermal;
    c.sample_period_us = monitoring.sample_period_us;
    c.duration_us = monitoring.duration_us;
    return c;
}

TelegraphConfig ExperimentConfig::telegraph_b() const {
    TelegraphConfig c = telegraph_a();
    c.t1_us = device_b.t1_us;
    c.p_e = device_b.p_e;
    c.non_thermal = device_b.non_thermal;
    return c;
}

EnsembleSpec ExperimentConfig::ensemble_spec(double fraction) const {
    EnsembleSpec s;
    s.device_a = telegraph_a();
    s.device_b = telegraph_b();
    s.readout_a = readout_a;
    s.readout_b = readout_b;
    s.injection = injection.injection;
    s.injection.fraction = fraction;
    s.source = analysis.states_source;
    s.filter = analysis.filter;
    s.datasets = monitoring.datasets;
    s.seed = seed;
    return s;
}

ThresholdConfig ExperimentConfig::threshold_config(std::size_t threads) const {
    ThresholdConfig t;
    t.base = ensemble_spec(0.0);
    t.fractions = injection.fractions;
    t.ensembles_per_fraction = analysis.ensembles_per_fraction;
    t.null_ensembles = analysis.null_ensembles;
    t.lags_us = analysis.lags();
    t.mean_mode = analysis.mean_mode;
    t.null_percentile = analysis.null_percentile;
    t.seed = seed;
    t.threads = threads;
    return t;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path &base_dir) {
    const IniDocument doc = IniDocument::parse(text);
    static const char *const kSections[] = {"run",       "device.a",  "device.b", "readout.a", "readout.b",
                                            "monitoring", "injection", "analysis", "spectrum"};
    for (const auto &s : doc.sections()) {
        if (std::find(std::begin(kSections), std::end(kSections), s) == std::end(kSections)) {
            invalid(s, "unknown section");
        }
    }
    ExperimentConfig c;

    const Reader run(doc, "run");
    const auto seed = run.integer("seed");
    if (!seed) {
        invalid("run.seed", "a master seed is required");
    }
    c.seed = *seed;

    for (const char *s : {"device.a", "device.b", "readout.a", "readout.b"}) {
        if (!doc.has_section(s)) {
            invalid(s, "section is required");
        }
    }
    c.device_a = read_device(Reader(doc, "device.a"));
    c.device_b = read_device(Reader(doc, "device.b"));
    c.readout_a = read_readout(Reader(doc, "readout.a"));
    c.readout_b = read_readout(Reader(doc, "readout.b"));

    const Reader mon(doc, "monitoring");
    c.monitoring.sample_period_us = mon.number("sample_period_us", c.monitoring.sample_period_us);
    c.monitoring.duration_us = mon.number("duration_us", c.monitoring.duration_us);
    c.monitoring.datasets = mon.integer("datasets").value_or(c.monitoring.datasets);
    if (c.monitoring.datasets < 2) {
        invalid("monitoring.datasets", "at least 2 datasets are required");
    }
    if (!(c.monitoring.sample_period_us > 0)) {
        invalid("monitoring.sample_period_us", "must be positive");
    }
    const double bins = c.monitoring.duration_us / c.monitoring.sample_period_us;
    if (!(bins >= 1) || std::abs(bins - std::round(bins)) > 1e-9 * bins) {
        invalid("monitoring.duration_us", "must be a positive multiple of the sample period");
    }
    checked("device.a", [&] { c.telegraph_a().validate(); });
    checked("device.b", [&] { c.telegraph_b().validate(); });

    const Reader inj(doc, "injection");
    c.injection.fractions = inj.numbers("fractions");
    for (double f : c.injection.fractions) {
        if (!(f >= 0 && f <= 1)) {
            invalid("injection.fractions", "every fraction must lie in [0, 1]");
        }
    }
    c.injection.simulate_fraction = inj.number("simulate_fraction", 0.0);
    auto &ci = c.injection.injection;
    ci.epoch_mean_length_us = inj.number("epoch_mean_length_us", ci.epoch_mean_length_us);
    ci.correlated_t1_us = inj.number("correlated_t1_us", ci.correlated_t1_us);
    ci.correlated_p_e = inj.number("correlated_p_e");
    ci.fraction = c.injection.simulate_fraction;
    checked("injection", [&] { ci.validate(c.monitoring.sample_period_us); });

    const Reader an(doc, "analysis");
    auto &a = c.analysis;
    a.lag_min_us = an.number("lag_min_us", a.lag_min_us);
    a.lag_max_us = an.number("lag_max_us", a.lag_max_us);
    a.lag_step_us = an.number("lag_step_us", a.lag_step_us);
    const double sp = c.monitoring.sample_period_us;
    const double ratio = a.lag_step_us / sp;
    if (!(a.lag_step_us > 0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        invalid("analysis.lag_step_us", "must be a positive multiple of the sample period");
    }
    if (!(a.lag_max_us >= a.lag_min_us)) {
        invalid("analysis.lag_max_us", "must not be below lag_min_us");
    }
    const double half = 0.5 * sp * static_cast<double>(c.telegraph_a().bin_count());
    if (!(std::abs(a.lag_min_us) < half) || !(std::abs(a.lag_max_us) < half)) {
        invalid("analysis.lag_min_us", "lags must be shorter than half the dataset duration");
    }
    if (a.lags().size() < 5) {
        invalid("analysis.lag_step_us", "the lag grid needs at least 5 lags for the decay fit");
    }
    a.filter.threshold = an.choice("threshold", a.filter.threshold,
                                   {{"near-new-state", ThresholdMode::kNearNewState},
                                    {"beyond-midpoint", ThresholdMode::kBeyondMidpoint}});
    a.filter.projection = an.choice("projection", a.filter.projection,
                                    {{"peak-axis", ProjectionMode::kPeakAxis}, {"i-axis", ProjectionMode::kIAxis}});
    a.peaks = an.choice("peaks", a.peaks, {{"exact", PeakSource::kExact}, {"estimated", PeakSource::kEstimated}});
    a.states_source = an.choice("states_source", a.states_source,
                                {{"filtered", StatesSource::kFiltered}, {"truth", StatesSource::kTruth}});
    a.mean_mode = an.choice("mean_mode", a.mean_mode, {{"grand", MeanMode::kGrand},
                                                       {"per-dataset", MeanMode::kPerDataset},
                                                       {"time-resolved", MeanMode::kTimeResolved}});
    a.null_percentile = an.number("null_percentile", a.null_percentile);
    if (!(a.null_percentile > 0 && a.null_percentile < 100)) {
        invalid("analysis.null_percentile", "must lie in (0, 100)");
    }
    a.null_ensembles = an.integer("null_ensembles").value_or(a.null_ensembles);
    if (a.null_ensembles < 1) {
        invalid("analysis.null_ensembles", "must be at least 1");
    }
    a.ensembles_per_fraction = an.integer("ensembles_per_fraction").value_or(a.ensembles_per_fraction);
    if (a.ensembles_per_fraction < 1) {
        invalid("analysis.ensembles_per_fraction", "must be at least 1");
    }
    // Both filter thresholds must leave a hysteresis band.
    checked("analysis.threshold", [&] {
        filter_thresholds(PeakModel::from_readout(c.readout_a), a.filter);
        filter_thresholds(PeakModel::from_readout(c.readout_b), a.filter);
    });

    const Reader sp_r(doc, "spectrum");
    auto &s = c.spectrum;
    s.phi_min = sp_r.number("phi_min", s.phi_min);
    s.phi_max = sp_r.number("phi_max", s.phi_max);
    s.points = sp_r.integer("points").value_or(s.points);
    if (!(s.phi_max > s.phi_min) || s.points < 2) {
        invalid("spectrum.points", "need at least 2 points over phi_min < phi_max");
    }
    if (auto d = sp_r.text("data")) {
        s.data = base_dir / *d;
    }
    s.fit_flux_offset = sp_r.boolean("fit_flux_offset").value_or(true);

    const auto unused = doc.unused();
    if (!unused.empty()) {
        invalid(unused.front(), "unknown key");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error &e) {
        invalid("config", e.what());
    }
    return parse_config(text, path.parent_path());
}

}  // namespace qjump
