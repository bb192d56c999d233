#pragma once

#include <span>
#include <vector>

#include "rofleet/core.hpp"
#include "rofleet/parallel.hpp"

namespace rofleet {

/// Exponentially weighted moving average parameterised by half-life, the
/// lag (in sample periods) after which a sample's weight has halved.
struct EwmaConfig {
    double half_life = 360.0;
    bool adjusted = true;  // normalise by the finite-sample weight sum
};

/// Local linear regression with tricube weights over the nearest
/// span * n samples of each point.
struct LoessConfig {
    double span = 0.3;
    int degree = 1;
};

/// Relative change of the median frequency of one RO between two epochs.
struct ShiftRecord {
    std::string device_id;
    std::string ro_id;
    GridLocation location;
    double f0_median = 0.0;
    double f1_median = 0.0;
    double delta = 0.0;
};

/// alpha = 1 - exp(-ln 2 / tau). Throws ConfigError for tau <= 0.
[[nodiscard]] double half_life_to_alpha(double tau);

/// Expresses a wall-clock half-life in sample periods of the given cadence.
[[nodiscard]] double half_life_in_samples(Duration half_life, Duration cadence);

[[nodiscard]] std::vector<double> ewma(std::span<const double> values, double alpha, bool adjusted = true);

/// Trend of a series by EWMA. Lags are counted in samples, so timestamp gaps
/// are not weighted differently; resample first when that matters.
[[nodiscard]] FrequencySeries ewma(const FrequencySeries& series, const EwmaConfig& cfg);

[[nodiscard]] FrequencySeries loess_trend(const FrequencySeries& series, const LoessConfig& cfg);

/// Linear interpolation of a gappy series onto a regular grid of `period`
/// starting at its first timestamp.
[[nodiscard]] FrequencySeries resample(const FrequencySeries& series, Duration period);

/// Delta = (median(second) - median(first)) / median(first).
[[nodiscard]] ShiftRecord epoch_shift(const FrequencySeries& first, const FrequencySeries& second);

/// Shift between the medians of the first and last `window` of a series.
[[nodiscard]] ShiftRecord window_shift(const FrequencySeries& series, Duration window);

/// Splits a shutdown-campaign series into measurement epochs wherever two
/// consecutive samples are more than `gap` apart.
[[nodiscard]] std::vector<FrequencySeries> split_epochs(const FrequencySeries& series, Duration gap);

enum class TrendMethod { ewma, loess };

struct TrendOptions {
    TrendMethod method = TrendMethod::ewma;
    EwmaConfig ewma;
    LoessConfig loess;
    Duration resample_period{0};  // zero disables resampling
};

/// Applies trend extraction to every series of a dataset.
[[nodiscard]] FleetDataset trend_fleet(const FleetDataset& dataset, const TrendOptions& opts,
                                       Execution exec = Execution::parallel);

/// window_shift over every series of a (trend-extracted) continuous dataset.
[[nodiscard]] std::vector<ShiftRecord> fleet_window_shifts(const FleetDataset& dataset, Duration window,
                                                           Execution exec = Execution::parallel);

/// epoch_shift between the first and last epoch of every series of a
/// shutdown dataset.
[[nodiscard]] std::vector<ShiftRecord> fleet_epoch_shifts(const FleetDataset& dataset,
                                                          Duration gap = kDay);

}  // namespace rofleet
