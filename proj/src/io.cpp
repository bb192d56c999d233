#include "rofleet/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rofleet/sim.hpp"

namespace rofleet::io {

namespace {

using namespace std::chrono;

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

template <typename T>
T parse_number(std::string_view text, const std::string& context) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw DataError(context + "cannot parse number '" + std::string(text) + "'");
    return value;
}

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') throw DataError("invalid ISO-8601 timestamp '" + std::string(text) + "'");
        v = v * 10 + (text[i] - '0');
    }
    return v;
}

// Reads lines, stripping a trailing '\r'; returns false at EOF.
bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

void expect_header(std::istream& in, std::string_view header, const std::string& source) {
    std::string line;
    if (!next_line(in, line)) throw DataError(source + ": empty file");
    if (line != header)
        throw DataError(where(source, 1) + "expected header '" + std::string(header) + "', got '" + line + "'");
}

}  // namespace

std::string format_iso8601(TimePoint t) {
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

TimePoint parse_iso8601(std::string_view text) {
    const bool zulu = text.size() == 20 && text[19] == 'Z';
    const bool offset = text.size() == 25 && text.substr(19) == "+00:00";
    if ((!zulu && !offset) || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
        text[16] != ':')
        throw DataError("invalid ISO-8601 UTC timestamp '" + std::string(text) + "'");
    const year_month_day ymd{year{parse_fixed(text, 0, 4)}, month{static_cast<unsigned>(parse_fixed(text, 5, 2))},
                             day{static_cast<unsigned>(parse_fixed(text, 8, 2))}};
    const int h = parse_fixed(text, 11, 2);
    const int m = parse_fixed(text, 14, 2);
    const int s = parse_fixed(text, 17, 2);
    if (!ymd.ok() || h > 23 || m > 59 || s > 59)
        throw DataError("invalid ISO-8601 UTC timestamp '" + std::string(text) + "'");
    return sys_days{ymd} + hours{h} + minutes{m} + seconds{s};
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

FleetDataset read_measurements(std::istream& in, Campaign campaign, const std::string& source) {
    expect_header(in, kMeasurementHeader, source);
    FleetDataset ds;
    ds.campaign = campaign;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::string line;
    std::size_t lineno = 1;
    while (next_line(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string ctx = where(source, lineno);
        const auto f = split(line);
        if (f.size() != 6) throw DataError(ctx + "expected 6 fields, got " + std::to_string(f.size()));
        if (f[0].empty() || f[1].empty()) throw DataError(ctx + "empty device_id or ro_id");
        const GridLocation loc{parse_number<int>(f[2], ctx), parse_number<int>(f[3], ctx)};
        if (loc.x < 0 || loc.y < 0) throw DataError(ctx + "grid location must be non-negative");
        TimePoint t;
        try {
            t = parse_iso8601(f[4]);
        } catch (const DataError& e) {
            throw DataError(ctx + e.what());
        }
        const double freq = parse_number<double>(f[5], ctx);
        if (!(freq > 0.0) || !std::isfinite(freq)) throw DataError(ctx + "frequency must be positive");

        const auto key = std::pair{std::string(f[0]), std::string(f[1])};
        auto [it, inserted] = index.try_emplace(key, ds.series.size());
        if (inserted) ds.series.push_back({key.first, key.second, loc, {}, {}});
        FrequencySeries& s = ds.series[it->second];
        if (s.location != loc) throw DataError(ctx + "location of " + series_key(s) + " changed");
        if (!s.timestamps.empty() && !(s.timestamps.back() < t))
            throw DataError(ctx + "timestamps of " + series_key(s) + " are not strictly increasing");
        s.timestamps.push_back(t);
        s.frequencies.push_back(freq);
    }

    if (campaign == Campaign::continuous) {
        std::vector<Duration::rep> gaps;
        for (const auto& s : ds.series)
            for (std::size_t i = 1; i < s.size(); ++i) gaps.push_back((s.timestamps[i] - s.timestamps[i - 1]).count());
        if (!gaps.empty()) {
            std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
            ds.sample_period = Duration{gaps[gaps.size() / 2]};
        }
    }
    return ds;
}

std::vector<CovariateSeries> read_covariates(std::istream& in, std::vector<std::string>& warnings,
                                             const std::string& source) {
    expect_header(in, kCovariateHeader, source);
    const auto& known = covariate_names();
    std::vector<CovariateSeries> out;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::string line;
    std::size_t lineno = 1;
    while (next_line(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string ctx = where(source, lineno);
        const auto f = split(line);
        if (f.size() != 4) throw DataError(ctx + "expected 4 fields, got " + std::to_string(f.size()));
        std::string name(f[1]);
        if (std::find(known.begin(), known.end(), name) == known.end() && !name.starts_with(kCustomCovariatePrefix)) {
            warnings.push_back(ctx + "unknown covariate '" + name + "' kept as '" +
                               std::string(kCustomCovariatePrefix) + name + "'");
            name = std::string(kCustomCovariatePrefix) + name;
        }
        TimePoint t;
        try {
            t = parse_iso8601(f[2]);
        } catch (const DataError& e) {
            throw DataError(ctx + e.what());
        }
        const double value = parse_number<double>(f[3], ctx);
        const auto key = std::pair{std::string(f[0]), name};
        auto [it, inserted] = index.try_emplace(key, out.size());
        if (inserted) out.push_back({key.first, key.second, {}, {}});
        CovariateSeries& c = out[it->second];
        if (!c.timestamps.empty() && !(c.timestamps.back() < t))
            throw DataError(ctx + "timestamps of covariate " + c.device_id + "/" + c.name +
                            " are not strictly increasing");
        c.timestamps.push_back(t);
        c.values.push_back(value);
    }
    return out;
}

IngestResult ingest(const std::filesystem::path& measurements, const std::optional<std::filesystem::path>& covariates,
                    Campaign campaign) {
    IngestResult result;
    std::ifstream in(measurements);
    if (!in) throw DataError("cannot open " + measurements.string());
    result.dataset = read_measurements(in, campaign, measurements.string());
    if (covariates) {
        std::ifstream cin(*covariates);
        if (!cin) throw DataError("cannot open " + covariates->string());
        result.dataset.covariates = read_covariates(cin, result.warnings, covariates->string());
    }
    const auto violations = validate(result.dataset);
    if (!violations.empty()) {
        std::string msg = measurements.string() + ": invalid dataset:";
        for (const auto& v : violations) msg += "\n  " + v.subject + ": " + v.rule;
        throw DataError(msg);
    }
    return result;
}

void write_measurements(std::ostream& out, const FleetDataset& dataset) {
    out << kMeasurementHeader << '\n';
    for (const auto& s : dataset.series)
        for (std::size_t i = 0; i < s.size(); ++i)
            out << s.device_id << ',' << s.ro_id << ',' << s.location.x << ',' << s.location.y << ','
                << format_iso8601(s.timestamps[i]) << ',' << format_double(s.frequencies[i]) << '\n';
}

void write_covariates(std::ostream& out, const std::vector<CovariateSeries>& covariates) {
    out << kCovariateHeader << '\n';
    for (const auto& c : covariates)
        for (std::size_t i = 0; i < c.values.size(); ++i)
            out << c.device_id << ',' << c.name << ',' << format_iso8601(c.timestamps[i]) << ','
                << format_double(c.values[i]) << '\n';
}

void write_shifts(std::ostream& out, const std::vector<ShiftRecord>& shifts) {
    out << kShiftHeader << '\n';
    for (const auto& r : shifts)
        out << r.device_id << ',' << r.ro_id << ',' << r.location.x << ',' << r.location.y << ','
            << format_double(r.f0_median) << ',' << format_double(r.f1_median) << ',' << format_double(r.delta)
            << '\n';
}

std::vector<ShiftRecord> read_shifts(std::istream& in, const std::string& source) {
    expect_header(in, kShiftHeader, source);
    std::vector<ShiftRecord> out;
    std::string line;
    std::size_t lineno = 1;
    while (next_line(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string ctx = where(source, lineno);
        const auto f = split(line);
        if (f.size() != 7) throw DataError(ctx + "expected 7 fields, got " + std::to_string(f.size()));
        out.push_back({std::string(f[0]), std::string(f[1]),
                       {parse_number<int>(f[2], ctx), parse_number<int>(f[3], ctx)}, parse_number<double>(f[4], ctx),
                       parse_number<double>(f[5], ctx), parse_number<double>(f[6], ctx)});
    }
    return out;
}

void write_map(std::ostream& out, const DegradationMap& map) {
    out << "x,y,value\n";
    for (std::size_t j = 0; j < map.resolution; ++j)
        for (std::size_t i = 0; i < map.resolution; ++i)
            out << format_double(map.x_at(i)) << ',' << format_double(map.y_at(j)) << ','
                << format_double(map.value(i, j)) << '\n';
}

void write_historical_forecasts(std::ostream& out, const std::vector<BacktestMetrics>& runs) {
    out << "device_id,ro_id,roll_time,actual,predicted\n";
    for (const auto& r : runs)
        for (const auto& p : r.historical_forecast)
            out << r.device_id << ',' << r.ro_id << ',' << format_iso8601(p.time) << ',' << format_double(p.actual)
                << ',' << format_double(p.predicted) << '\n';
}

}  // namespace rofleet::io
