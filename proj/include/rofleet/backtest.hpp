#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rofleet/core.hpp"
#include "rofleet/forecast.hpp"
#include "rofleet/metrics.hpp"
#include "rofleet/parallel.hpp"
#include "rofleet/stats.hpp"

namespace rofleet {

/// Length of the historical forecast produced by a backtest,
/// F = T - (L + H). Throws DataError("no evaluable window") when F <= 0.
[[nodiscard]] double historical_forecast_length(double total, double train, double horizon);

struct BacktestConfig {
    std::optional<double> train_days;  // fixed window length; empty = expanding
    double initial_train_days = 40.0;  // first window of an expanding backtest
    double horizon_days = 60.0;
    std::size_t step = 1;                     // samples between forecast origins
    std::optional<double> evaluation_days;    // only forecast targets in the final N days
    ModelSpec model = ThetaConfig{};
};

/// One roll: training data ends before `time - horizon`, the model's H-step
/// prediction for `time` is compared with the actual value there.
struct ForecastPoint {
    TimePoint time;
    double actual = 0.0;
    double predicted = 0.0;
    std::size_t train_size = 0;
};

struct BacktestMetrics {
    std::string device_id;
    std::string ro_id;
    std::string model;  // configuration label
    std::vector<ForecastPoint> historical_forecast;
    double mape = 0.0;
    Duration historical_span{0};     // last target time - first target time
    Duration comparison_window{0};   // span actually scored
};

/// Everything a forecaster may look at during one roll. Real models only
/// read values[train_begin, train_end); the full series is exposed so tests
/// can plug in an oracle.
struct RollContext {
    std::span<const double> values;
    const CovariateMatrix* covariates = nullptr;
    std::size_t train_begin = 0;
    std::size_t train_end = 0;
    std::size_t target = 0;
    std::size_t horizon = 0;  // samples; target = train_end - 1 + horizon
};

using Forecaster = std::function<double(const RollContext&)>;

/// Forecaster that fits `model` on the training window and returns its
/// H-step-ahead prediction.
[[nodiscard]] Forecaster model_forecaster(const ModelSpec& model);

/// Samples per day of a regular series; cadence must divide a day.
[[nodiscard]] std::size_t samples_per_day(Duration cadence);

/// Rolls a forecasting origin over the series. Targets are anchored at the
/// series end and spaced `step` samples apart; fixed windows use the last
/// train_days of data before each origin, expanding windows all of it.
[[nodiscard]] BacktestMetrics backtest(const FrequencySeries& series, Duration cadence, const BacktestConfig& cfg,
                                       const Forecaster& forecaster, const CovariateMatrix& covariates = {});
[[nodiscard]] BacktestMetrics backtest(const FrequencySeries& series, Duration cadence, const BacktestConfig& cfg,
                                       const CovariateMatrix& covariates = {});

struct ComparisonRow {
    std::string model;
    double original_mape = 0.0;
    double fair_mape = 0.0;
    std::size_t points = 0;
};

struct ComparisonTable {
    TimePoint window_begin;
    TimePoint window_end;
    Duration window{0};
    std::vector<ComparisonRow> rows;
};

/// Rescores every result over the final stretch covered by all of them,
/// i.e. the shortest historical forecast aligned to the series end. All
/// configurations are scored on identical timestamp sets.
[[nodiscard]] ComparisonTable fair_compare(const std::vector<BacktestMetrics>& results);

/// Covariates of one device resampled onto the given timestamps by holding
/// the last observed value (in covariate_names() order, unknown names last).
[[nodiscard]] CovariateMatrix align_covariates(const std::vector<CovariateSeries>& covariates,
                                               const std::string& device_id, const std::vector<TimePoint>& timestamps);

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
};

[[nodiscard]] Histogram histogram(std::span<const double> values, std::size_t bins);

struct FleetBacktest {
    std::vector<BacktestMetrics> per_series;  // dataset order
    std::vector<double> mapes;
    Distribution distribution;
    Histogram histogram;
};

/// Backtests every RO of a continuous campaign with the same configuration.
[[nodiscard]] FleetBacktest fleet_backtest(const FleetDataset& dataset, const BacktestConfig& cfg,
                                           Execution exec = Execution::parallel);

}  // namespace rofleet
