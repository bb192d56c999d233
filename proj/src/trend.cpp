#include "rofleet/trend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rofleet {

double half_life_to_alpha(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("half-life must be positive");
    return 1.0 - std::exp(-std::numbers::ln2 / tau);
}

double half_life_in_samples(Duration half_life, Duration cadence) {
    if (cadence <= Duration::zero()) throw ConfigError("cadence must be positive");
    return static_cast<double>(half_life.count()) / static_cast<double>(cadence.count());
}

std::vector<double> ewma(std::span<const double> values, double alpha, bool adjusted) {
    if (values.empty()) throw DataError("ewma of an empty series");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("ewma alpha must lie in (0, 1]");
    // Work on offsets from the first sample; frequencies are ~1e8 while the
    // variations of interest are ~1e4 smaller.
    const double origin = values.front();
    const double decay = 1.0 - alpha;
    std::vector<double> out(values.size());
    if (adjusted) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t t = 0; t < values.size(); ++t) {
            num = (values[t] - origin) + decay * num;
            den = 1.0 + decay * den;
            out[t] = origin + num / den;
        }
    } else {
        double level = 0.0;
        for (std::size_t t = 0; t < values.size(); ++t) {
            level = t == 0 ? 0.0 : alpha * (values[t] - origin) + decay * level;
            out[t] = origin + level;
        }
    }
    return out;
}

FrequencySeries ewma(const FrequencySeries& series, const EwmaConfig& cfg) {
    if (series.empty()) throw DataError("series " + series_key(series) + " is empty");
    FrequencySeries out = series;
    out.frequencies = ewma(series.frequencies, half_life_to_alpha(cfg.half_life), cfg.adjusted);
    return out;
}

FrequencySeries loess_trend(const FrequencySeries& series, const LoessConfig& cfg) {
    if (cfg.degree != 1) throw ConfigError("only local linear LOESS (degree 1) is supported");
    if (!(cfg.span > 0.0 && cfg.span <= 1.0)) throw ConfigError("LOESS span must lie in (0, 1]");
    const std::size_t n = series.size();
    const auto q = static_cast<std::size_t>(std::floor(cfg.span * static_cast<double>(n) + 1e-9));
    if (q < 4)
        throw DataError("LOESS window too small for " + series_key(series) + ": span * n = " +
                        std::to_string(cfg.span * static_cast<double>(n)) + " < 4");

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = static_cast<double>((series.timestamps[i] - series.timestamps.front()).count());
    const double y0 = series.frequencies.front();

    FrequencySeries out = series;
    std::size_t lo = 0;
    std::vector<double> w(q);
    for (std::size_t i = 0; i < n; ++i) {
        // Slide the q-point window while that brings it closer to x[i].
        while (lo + q < n && x[lo + q] - x[i] < x[i] - x[lo]) ++lo;
        const double dmax = std::max(x[i] - x[lo], x[lo + q - 1] - x[i]);
        double sw = 0.0;
        double swx = 0.0;
        double swy = 0.0;
        for (std::size_t k = 0; k < q; ++k) {
            const double d = std::abs(x[lo + k] - x[i]) / dmax;
            const double c = 1.0 - d * d * d;
            w[k] = c > 0.0 ? c * c * c : 0.0;
            sw += w[k];
            swx += w[k] * (x[lo + k] - x[i]);
            swy += w[k] * (series.frequencies[lo + k] - y0);
        }
        const double xm = swx / sw;
        const double ym = swy / sw;
        double sxx = 0.0;
        double sxy = 0.0;
        for (std::size_t k = 0; k < q; ++k) {
            const double dx = (x[lo + k] - x[i]) - xm;
            sxx += w[k] * dx * dx;
            sxy += w[k] * dx * ((series.frequencies[lo + k] - y0) - ym);
        }
        const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
        out.frequencies[i] = y0 + (ym - slope * xm);
    }
    return out;
}

FrequencySeries resample(const FrequencySeries& series, Duration period) {
    if (period <= Duration::zero()) throw ConfigError("resample period must be positive");
    if (series.empty()) throw DataError("series " + series_key(series) + " is empty");
    FrequencySeries out{series.device_id, series.ro_id, series.location, {}, {}};
    const TimePoint first = series.timestamps.front();
    const TimePoint last = series.timestamps.back();
    std::size_t j = 0;
    for (TimePoint t = first; t <= last; t += period) {
        while (j + 1 < series.size() && series.timestamps[j + 1] <= t) ++j;
        double v = series.frequencies[j];
        if (series.timestamps[j] != t && j + 1 < series.size()) {
            const double span = static_cast<double>((series.timestamps[j + 1] - series.timestamps[j]).count());
            const double u = static_cast<double>((t - series.timestamps[j]).count()) / span;
            v += u * (series.frequencies[j + 1] - series.frequencies[j]);
        }
        out.timestamps.push_back(t);
        out.frequencies.push_back(v);
    }
    return out;
}

namespace {

ShiftRecord make_shift(const FrequencySeries& id, double f0, double f1) {
    if (!(f0 > 0.0)) throw DataError("initial median of " + series_key(id) + " must be positive");
    return {id.device_id, id.ro_id, id.location, f0, f1, (f1 - f0) / f0};
}

}  // namespace

ShiftRecord epoch_shift(const FrequencySeries& first, const FrequencySeries& second) {
    if (first.device_id != second.device_id || first.ro_id != second.ro_id)
        throw DataError("epoch_shift needs both epochs of the same RO, got " + series_key(first) + " and " +
                        series_key(second));
    if (first.empty() || second.empty()) throw DataError("empty epoch for " + series_key(first));
    return make_shift(first, median(first.frequencies), median(second.frequencies));
}

ShiftRecord window_shift(const FrequencySeries& series, Duration window) {
    if (window <= Duration::zero()) throw ConfigError("shift window must be positive");
    if (series.empty()) throw DataError("series " + series_key(series) + " is empty");
    const TimePoint first = series.timestamps.front();
    const TimePoint last = series.timestamps.back();
    if (last - first < 2 * window)
        throw DataError("series " + series_key(series) + " is shorter than two shift windows");
    std::vector<double> head;
    std::vector<double> tail;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.timestamps[i] < first + window) head.push_back(series.frequencies[i]);
        if (series.timestamps[i] > last - window) tail.push_back(series.frequencies[i]);
    }
    return make_shift(series, median(head), median(tail));
}

std::vector<FrequencySeries> split_epochs(const FrequencySeries& series, Duration gap) {
    std::vector<FrequencySeries> epochs;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (i == 0 || series.timestamps[i] - series.timestamps[i - 1] > gap)
            epochs.push_back({series.device_id, series.ro_id, series.location, {}, {}});
        epochs.back().timestamps.push_back(series.timestamps[i]);
        epochs.back().frequencies.push_back(series.frequencies[i]);
    }
    return epochs;
}

FleetDataset trend_fleet(const FleetDataset& dataset, const TrendOptions& opts, Execution exec) {
    FleetDataset out;
    out.campaign = dataset.campaign;
    out.sample_period = opts.resample_period > Duration::zero() ? opts.resample_period : dataset.sample_period;
    out.covariates = dataset.covariates;
    out.series.resize(dataset.series.size());
    for_each_index(exec, dataset.series.size(), [&](std::size_t i) {
        const FrequencySeries& raw = dataset.series[i];
        const FrequencySeries input =
            opts.resample_period > Duration::zero() ? resample(raw, opts.resample_period) : raw;
        out.series[i] = opts.method == TrendMethod::ewma ? ewma(input, opts.ewma) : loess_trend(input, opts.loess);
    });
    return out;
}

std::vector<ShiftRecord> fleet_window_shifts(const FleetDataset& dataset, Duration window, Execution exec) {
    std::vector<ShiftRecord> out(dataset.series.size());
    for_each_index(exec, dataset.series.size(),
                   [&](std::size_t i) { out[i] = window_shift(dataset.series[i], window); });
    return out;
}

std::vector<ShiftRecord> fleet_epoch_shifts(const FleetDataset& dataset, Duration gap) {
    std::vector<ShiftRecord> out;
    out.reserve(dataset.series.size());
    for (const auto& s : dataset.series) {
        const auto epochs = split_epochs(s, gap);
        if (epochs.size() < 2)
            throw DataError("series " + series_key(s) + " has fewer than two measurement epochs");
        out.push_back(epoch_shift(epochs.front(), epochs.back()));
    }
    return out;
}

}  // namespace rofleet
