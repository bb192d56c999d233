#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rofleet/core.hpp"
#include "rofleet/parallel.hpp"
#include "rofleet/trend.hpp"

namespace rofleet {

inline constexpr double kModifiedZConstant = 0.6745;
inline constexpr double kModifiedZThreshold = 3.5;
// Scale of the mean absolute deviation used when the MAD collapses to zero.
inline constexpr double kMeanAdConstant = 1.253314;

/// Per-RO relative shifts grouped by device.
using DeviceShifts = std::map<std::string, std::vector<double>>;

[[nodiscard]] DeviceShifts group_by_device(const std::vector<ShiftRecord>& records);

struct DeviceScore {
    std::string device_id;
    double median_shift = 0.0;
    double z = 0.0;
    bool flagged = false;
};

struct OutlierReport {
    std::vector<DeviceScore> devices;  // ordered by device_id
    double fleet_median = 0.0;
    double mad = 0.0;
    double threshold = kModifiedZThreshold;
    bool mad_fallback = false;  // z computed from the mean absolute deviation
};

/// Modified Z-score of every device's median shift against the fleet median:
///   z = 0.6745 (m_d - m) / MAD,   MAD = median |m_d - m|.
/// With MAD = 0 the mean absolute deviation (scaled by 1.253314) is used
/// instead; if that is zero too, every z is 0. Needs at least two devices.
[[nodiscard]] OutlierReport modified_z_scores(const DeviceShifts& device_shifts,
                                              double threshold = kModifiedZThreshold);

struct SharePoint {
    double threshold = 0.0;
    double share = 0.0;
};

/// Fraction of devices with |z| above each threshold. Thresholds must be
/// positive and sorted ascending; a zero threshold is allowed as a boundary.
[[nodiscard]] std::vector<SharePoint> outlier_share_curve(const DeviceShifts& device_shifts,
                                                          std::span<const double> thresholds);

struct RegressionResult {
    double slope = 0.0;      // Hz per sample
    double intercept = 0.0;  // Hz at sample index 0
    double r2 = 0.0;
};

/// Ordinary least squares of the values on their sample index.
[[nodiscard]] RegressionResult fit_linear(std::span<const double> values);
[[nodiscard]] RegressionResult fit_linear(const FrequencySeries& series);

/// Pair counts of (index, value) pairs; `tied` counts pairs of equal values.
struct PairCounts {
    std::uint64_t concordant = 0;
    std::uint64_t discordant = 0;
    std::uint64_t tied = 0;
};

/// O(n log n) pair counting against the time index (merge-sort inversions).
[[nodiscard]] PairCounts count_pairs(std::span<const double> values);

struct TrendTestResult {
    std::size_t n = 0;
    double tau = 0.0;  // tau-b
    std::uint64_t concordant = 0;
    std::uint64_t discordant = 0;
    double z = 0.0;
    double p_value = 1.0;  // two-sided
    bool significant = false;
};

inline constexpr std::size_t kMinKendallSamples = 10;

/// Kendall's tau-b between the values and time, with a two-sided p-value
/// from the tie-corrected normal approximation of the null distribution.
/// Throws DataError for fewer than 10 samples.
[[nodiscard]] TrendTestResult kendall_tau(std::span<const double> values, double alpha = 0.01);
[[nodiscard]] TrendTestResult kendall_tau(const FrequencySeries& series, double alpha = 0.01);

struct FleetTrendTest {
    std::vector<TrendTestResult> per_series;  // dataset order
    std::vector<double> retained_taus;        // p < alpha, dataset order
    double discarded_fraction = 0.0;
    double alpha = 0.01;
};

/// Kendall test over every (trend-extracted) series of a continuous
/// campaign; insignificant series are discarded.
[[nodiscard]] FleetTrendTest fleet_trend_test(const FleetDataset& dataset, double alpha = 0.01,
                                              Execution exec = Execution::parallel);

[[nodiscard]] std::vector<RegressionResult> fleet_slopes(const FleetDataset& dataset,
                                                         Execution exec = Execution::parallel);

/// Two-sided tail probability of a standard normal deviate.
[[nodiscard]] double two_sided_normal_p(double z);

/// Summary of a sample used in reports: quantiles by linear interpolation.
struct Distribution {
    std::size_t count = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double skewness = 0.0;  // sample skewness, moment estimator
};

[[nodiscard]] Distribution describe(std::span<const double> values);
[[nodiscard]] double quantile(std::span<const double> values, double q);

}  // namespace rofleet
