#include "rofleet/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace rofleet {

namespace {

template <typename T>
bool strictly_increasing(const std::vector<T>& v) {
    return std::adjacent_find(v.begin(), v.end(),
                              [](const T& a, const T& b) { return !(a < b); }) == v.end();
}

}  // namespace

std::string series_key(const FrequencySeries& s) { return s.device_id + "/" + s.ro_id; }

const char* to_string(Campaign c) noexcept {
    return c == Campaign::shutdown ? "shutdown" : "continuous";
}

Campaign campaign_from_string(const std::string& s) {
    if (s == "shutdown") return Campaign::shutdown;
    if (s == "continuous") return Campaign::continuous;
    throw ConfigError("unknown campaign '" + s + "' (expected shutdown|continuous)");
}

std::vector<Violation> validate(const FleetDataset& dataset) {
    std::vector<Violation> out;
    std::set<std::pair<std::string, std::string>> seen;

    for (const auto& s : dataset.series) {
        const std::string key = series_key(s);
        if (!seen.emplace(s.device_id, s.ro_id).second)
            out.push_back({key, "duplicate (device_id, ro_id)"});
        if (s.location.x < 0 || s.location.y < 0)
            out.push_back({key, "grid location must be non-negative"});
        if (s.timestamps.size() != s.frequencies.size())
            out.push_back({key, "timestamps and frequencies differ in length"});
        if (!strictly_increasing(s.timestamps))
            out.push_back({key, "timestamps not strictly increasing"});
        if (std::any_of(s.frequencies.begin(), s.frequencies.end(),
                        [](double f) { return !(f > 0.0) || !std::isfinite(f); }))
            out.push_back({key, "frequencies must be positive and finite"});
    }

    for (const auto& c : dataset.covariates) {
        const std::string key = "covariate " + c.device_id + "/" + c.name;
        if (c.timestamps.size() != c.values.size())
            out.push_back({key, "timestamps and values differ in length"});
        if (!strictly_increasing(c.timestamps))
            out.push_back({key, "timestamps not strictly increasing"});
        if (std::any_of(c.values.begin(), c.values.end(), [](double v) { return !std::isfinite(v); }))
            out.push_back({key, "values must be finite"});
    }

    if (dataset.campaign == Campaign::continuous && dataset.sample_period <= Duration::zero())
        out.push_back({"dataset", "continuous campaign requires a positive sample period"});
    return out;
}

double median(std::span<const double> values) {
    if (values.empty()) throw DataError("empty sample");
    std::vector<double> v(values.begin(), values.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

}  // namespace rofleet
