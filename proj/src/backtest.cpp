#include "rofleet/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rofleet/sim.hpp"

namespace rofleet {

double mape(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw DataError("MAPE needs equally long sequences");
    if (actual.empty()) throw DataError("MAPE of an empty sequence");
    double total = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        if (actual[t] == 0.0) throw DataError("MAPE undefined at zero");
        total += std::abs((actual[t] - predicted[t]) / actual[t]);
    }
    return 100.0 * total / static_cast<double>(actual.size());
}

double historical_forecast_length(double total, double train, double horizon) {
    if (!(train > 0.0) || !(horizon > 0.0)) throw ConfigError("training length and horizon must be positive");
    if (!(total > train + horizon)) throw DataError("no evaluable window");
    return total - (train + horizon);
}

std::size_t samples_per_day(Duration cadence) {
    if (cadence <= Duration::zero() || kDay % cadence != Duration::zero())
        throw ConfigError("cadence must be positive and divide one day");
    return static_cast<std::size_t>(kDay / cadence);
}

Forecaster model_forecaster(const ModelSpec& model) {
    return [model](const RollContext& ctx) {
        const auto train = ctx.values.subspan(ctx.train_begin, ctx.train_end - ctx.train_begin);
        CovariateMatrix cov;
        if (ctx.covariates != nullptr && uses_covariates(model)) {
            for (const auto& col : *ctx.covariates)
                cov.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(ctx.train_begin),
                                 col.begin() + static_cast<std::ptrdiff_t>(ctx.train_end));
        }
        return run_model(model, train, cov, ctx.horizon).values.back();
    };
}

namespace {

std::size_t to_samples(double days, std::size_t per_day, const char* what) {
    if (!(days > 0.0)) throw ConfigError(std::string(what) + " must be positive");
    const auto samples = static_cast<std::size_t>(std::llround(days * static_cast<double>(per_day)));
    if (samples == 0) throw ConfigError(std::string(what) + " is shorter than one sample");
    return samples;
}

double score(const std::vector<ForecastPoint>& points) {
    std::vector<double> actual;
    std::vector<double> predicted;
    for (const auto& p : points) {
        actual.push_back(p.actual);
        predicted.push_back(p.predicted);
    }
    return mape(actual, predicted);
}

}  // namespace

BacktestMetrics backtest(const FrequencySeries& series, Duration cadence, const BacktestConfig& cfg,
                         const Forecaster& forecaster, const CovariateMatrix& covariates) {
    if (cfg.step == 0) throw ConfigError("backtest step must be at least 1 sample");
    const std::size_t per_day = samples_per_day(cadence);
    const std::size_t horizon = to_samples(cfg.horizon_days, per_day, "forecast horizon");
    const std::size_t min_train =
        to_samples(cfg.train_days.value_or(cfg.initial_train_days), per_day, "training length");
    const std::size_t n = series.size();
    if (n <= min_train + horizon) throw DataError("no evaluable window for " + series_key(series));
    for (const auto& col : covariates)
        if (col.size() != n) throw DataError("covariates of " + series_key(series) + " are not aligned");

    TimePoint earliest = series.timestamps.front();
    if (cfg.evaluation_days) {
        const auto seconds = static_cast<Duration::rep>(std::llround(*cfg.evaluation_days * 86400.0));
        earliest = series.timestamps.back() - Duration{seconds};
    }

    std::vector<std::size_t> targets;
    for (std::size_t p = n - 1;; p -= cfg.step) {
        if (p + 1 < horizon + min_train || series.timestamps[p] < earliest) break;
        targets.push_back(p);
        if (p < cfg.step) break;
    }
    if (targets.empty()) throw DataError("no evaluable window for " + series_key(series));
    std::reverse(targets.begin(), targets.end());

    BacktestMetrics out;
    out.device_id = series.device_id;
    out.ro_id = series.ro_id;
    out.model = describe(cfg.model);
    out.historical_forecast.reserve(targets.size());
    for (const std::size_t p : targets) {
        RollContext ctx;
        ctx.values = series.frequencies;
        ctx.covariates = covariates.empty() ? nullptr : &covariates;
        ctx.train_end = p + 1 - horizon;
        ctx.train_begin = cfg.train_days ? ctx.train_end - min_train : 0;
        ctx.target = p;
        ctx.horizon = horizon;
        double predicted = 0.0;
        try {
            predicted = forecaster(ctx);
        } catch (const Error& e) {
            throw NumericalError("backtest of " + series_key(series) + " failed at " +
                                 std::to_string(p) + ": " + e.what());
        }
        out.historical_forecast.push_back(
            {series.timestamps[p], series.frequencies[p], predicted, ctx.train_end - ctx.train_begin});
    }
    out.mape = score(out.historical_forecast);
    out.historical_span = out.historical_forecast.back().time - out.historical_forecast.front().time;
    out.comparison_window = out.historical_span;
    return out;
}

BacktestMetrics backtest(const FrequencySeries& series, Duration cadence, const BacktestConfig& cfg,
                         const CovariateMatrix& covariates) {
    if (uses_covariates(cfg.model) && covariates.empty())
        throw DataError("model " + describe(cfg.model) + " needs covariates for " + series_key(series));
    return backtest(series, cadence, cfg, model_forecaster(cfg.model), covariates);
}

ComparisonTable fair_compare(const std::vector<BacktestMetrics>& results) {
    if (results.empty()) throw DataError("nothing to compare");
    for (const auto& r : results)
        if (r.historical_forecast.empty()) throw DataError("empty historical forecast for " + r.model);
    const TimePoint end = results.front().historical_forecast.back().time;
    Duration window = results.front().historical_span;
    for (const auto& r : results) {
        if (r.historical_forecast.back().time != end)
            throw DataError("fair comparison needs backtests of the same series end");
        window = std::min(window, r.historical_span);
    }

    ComparisonTable table;
    table.window = window;
    table.window_end = end;
    table.window_begin = end - window;
    std::vector<TimePoint> reference;
    for (std::size_t i = 0; i < results.size(); ++i) {
        std::vector<ForecastPoint> kept;
        for (const auto& p : results[i].historical_forecast)
            if (p.time >= table.window_begin) kept.push_back(p);
        if (kept.empty()) throw DataError("empty comparison window");
        std::vector<TimePoint> times;
        for (const auto& p : kept) times.push_back(p.time);
        if (i == 0)
            reference = times;
        else if (times != reference)
            throw DataError("backtests are not aligned on the comparison window (different strides?)");
        table.rows.push_back({results[i].model, results[i].mape, score(kept), kept.size()});
    }
    return table;
}

CovariateMatrix align_covariates(const std::vector<CovariateSeries>& covariates, const std::string& device_id,
                                 const std::vector<TimePoint>& timestamps) {
    const auto& known = covariate_names();
    std::vector<const CovariateSeries*> selected;
    for (const auto& c : covariates)
        if (c.device_id == device_id && !c.values.empty()) selected.push_back(&c);
    auto rank = [&](const CovariateSeries* c) {
        const auto it = std::find(known.begin(), known.end(), c->name);
        return std::pair{static_cast<std::size_t>(it - known.begin()), c->name};
    };
    std::sort(selected.begin(), selected.end(),
              [&](const CovariateSeries* a, const CovariateSeries* b) { return rank(a) < rank(b); });

    CovariateMatrix out;
    for (const auto* c : selected) {
        std::vector<double> col;
        col.reserve(timestamps.size());
        std::size_t j = 0;
        for (const TimePoint t : timestamps) {
            while (j + 1 < c->timestamps.size() && c->timestamps[j + 1] <= t) ++j;
            col.push_back(c->values[j]);
        }
        out.push_back(std::move(col));
    }
    return out;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty() || bins == 0) throw DataError("histogram needs values and bins");
    Histogram h;
    h.lo = *std::min_element(values.begin(), values.end());
    h.hi = *std::max_element(values.begin(), values.end());
    h.counts.assign(bins, 0);
    const double width = (h.hi - h.lo) / static_cast<double>(bins);
    for (double v : values) {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - h.lo) / width) : 0;
        ++h.counts[std::min(b, bins - 1)];
    }
    return h;
}

FleetBacktest fleet_backtest(const FleetDataset& dataset, const BacktestConfig& cfg, Execution exec) {
    if (dataset.campaign != Campaign::continuous) throw DataError("backtesting requires a continuous campaign");
    if (dataset.series.empty()) throw DataError("no series to backtest");
    const bool with_cov = uses_covariates(cfg.model);
    if (with_cov && dataset.covariates.empty())
        throw DataError("model " + describe(cfg.model) + " needs covariates but the dataset has none");

    FleetBacktest out;
    out.per_series.resize(dataset.series.size());
    for_each_index(exec, dataset.series.size(), [&](std::size_t i) {
        const auto& s = dataset.series[i];
        const CovariateMatrix cov =
            with_cov ? align_covariates(dataset.covariates, s.device_id, s.timestamps) : CovariateMatrix{};
        out.per_series[i] = backtest(s, dataset.sample_period, cfg, cov);
    });
    for (const auto& m : out.per_series) out.mapes.push_back(m.mape);
    out.distribution = describe(out.mapes);
    out.histogram = histogram(out.mapes, 20);
    return out;
}

}  // namespace rofleet
