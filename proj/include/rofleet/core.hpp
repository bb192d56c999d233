#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rofleet/error.hpp"

namespace rofleet {

using TimePoint = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

inline constexpr Duration kDay{86400};

/// Placement of a ring oscillator on the FPGA fabric (column, row).
struct GridLocation {
    int x = 0;
    int y = 0;

    friend auto operator<=>(const GridLocation&, const GridLocation&) = default;
};

/// Timestamped frequency samples of one ring oscillator.
struct FrequencySeries {
    std::string device_id;
    std::string ro_id;
    GridLocation location;
    std::vector<TimePoint> timestamps;
    std::vector<double> frequencies;  // Hz

    [[nodiscard]] std::size_t size() const noexcept { return frequencies.size(); }
    [[nodiscard]] bool empty() const noexcept { return frequencies.empty(); }
};

/// One environmental covariate (voltage rail, temperature, current) of a device.
struct CovariateSeries {
    std::string device_id;
    std::string name;
    std::vector<TimePoint> timestamps;
    std::vector<double> values;
};

enum class Campaign { shutdown, continuous };

struct FleetDataset {
    std::vector<FrequencySeries> series;
    std::vector<CovariateSeries> covariates;
    Campaign campaign = Campaign::continuous;
    Duration sample_period{0};  // continuous campaigns only
};

struct Violation {
    std::string subject;  // "device/ro", "covariate device/name" or "dataset"
    std::string rule;
};

/// Checks every structural invariant of the data model. Returns an empty
/// list iff the dataset is well formed.
[[nodiscard]] std::vector<Violation> validate(const FleetDataset& dataset);

/// Standard median; even-length samples average the two central values.
/// Throws DataError("empty sample") on empty input.
[[nodiscard]] double median(std::span<const double> values);

/// Median over the values of a series, convenience for the common case.
[[nodiscard]] inline double median(const std::vector<double>& values) {
    return median(std::span<const double>(values));
}

[[nodiscard]] std::string series_key(const FrequencySeries& s);

[[nodiscard]] const char* to_string(Campaign c) noexcept;
[[nodiscard]] Campaign campaign_from_string(const std::string& s);

}  // namespace rofleet
