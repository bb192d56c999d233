#include "rofleet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rofleet {

DeviceShifts group_by_device(const std::vector<ShiftRecord>& records) {
    DeviceShifts out;
    for (const auto& r : records) out[r.device_id].push_back(r.delta);
    return out;
}

OutlierReport modified_z_scores(const DeviceShifts& device_shifts, double threshold) {
    if (device_shifts.size() < 2) throw DataError("modified Z-scores need at least 2 devices");
    if (!(threshold >= 0.0)) throw ConfigError("outlier threshold must be non-negative");

    OutlierReport report;
    report.threshold = threshold;
    std::vector<double> medians;
    medians.reserve(device_shifts.size());
    for (const auto& [device, shifts] : device_shifts) {
        if (shifts.empty()) throw DataError("device " + device + " has no RO shifts");
        medians.push_back(median(shifts));
        report.devices.push_back({device, medians.back(), 0.0, false});
    }

    report.fleet_median = median(medians);
    std::vector<double> deviations(medians.size());
    std::transform(medians.begin(), medians.end(), deviations.begin(),
                   [&](double m) { return std::abs(m - report.fleet_median); });
    report.mad = median(deviations);

    double gain = kModifiedZConstant;
    double scale = report.mad;
    if (report.mad == 0.0) {
        report.mad_fallback = true;
        const double mean_ad =
            std::accumulate(deviations.begin(), deviations.end(), 0.0) / static_cast<double>(deviations.size());
        gain = 1.0;
        scale = kMeanAdConstant * mean_ad;
    }
    for (auto& d : report.devices) {
        d.z = scale > 0.0 ? gain * (d.median_shift - report.fleet_median) / scale : 0.0;
        d.flagged = std::abs(d.z) > threshold;
    }
    return report;
}

std::vector<SharePoint> outlier_share_curve(const DeviceShifts& device_shifts, std::span<const double> thresholds) {
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw ConfigError("share-curve thresholds must be sorted ascending");
    if (std::any_of(thresholds.begin(), thresholds.end(), [](double t) { return !(t >= 0.0); }))
        throw ConfigError("share-curve thresholds must be non-negative");
    const OutlierReport report = modified_z_scores(device_shifts);
    std::vector<SharePoint> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto flagged = std::count_if(report.devices.begin(), report.devices.end(),
                                           [t](const DeviceScore& d) { return std::abs(d.z) > t; });
        out.push_back({t, static_cast<double>(flagged) / static_cast<double>(report.devices.size())});
    }
    return out;
}

RegressionResult fit_linear(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw DataError("linear fit needs at least 2 samples");
    const double y0 = values.front();
    const double xm = static_cast<double>(n - 1) / 2.0;
    double ym = 0.0;
    for (double v : values) ym += v - y0;
    ym /= static_cast<double>(n);

    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - xm;
        const double dy = (values[i] - y0) - ym;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    RegressionResult r;
    r.slope = sxy / sxx;
    r.intercept = y0 + ym - r.slope * xm;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = (values[i] - y0) - (ym + r.slope * (static_cast<double>(i) - xm));
            ss_res += e * e;
        }
        r.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    } else {
        r.r2 = 1.0;  // constant series is fitted exactly
    }
    return r;
}

RegressionResult fit_linear(const FrequencySeries& series) { return fit_linear(series.frequencies); }

namespace {

// Counts pairs i < j with v[i] > v[j] while merge-sorting v in place.
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
    std::size_t i = lo;
    std::size_t j = mid;
    std::size_t k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inv += mid - i;
            scratch[k++] = v[j++];
        } else {
            scratch[k++] = v[i++];
        }
    }
    while (i < mid) scratch[k++] = v[i++];
    while (j < hi) scratch[k++] = v[j++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

// Sum over groups of equal values of f(group size).
template <typename F>
double tie_sum(const std::vector<double>& sorted, F f) {
    double total = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        if (j - i > 1) total += f(static_cast<double>(j - i));
        i = j;
    }
    return total;
}

}  // namespace

PairCounts count_pairs(std::span<const double> values) {
    if (std::any_of(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }))
        throw DataError("pair counting requires finite values");
    std::vector<double> v(values.begin(), values.end());
    std::vector<double> scratch(v.size());
    PairCounts c;
    c.discordant = count_inversions(v, scratch, 0, v.size());
    c.tied = static_cast<std::uint64_t>(tie_sum(v, [](double t) { return t * (t - 1.0) / 2.0; }));
    const std::uint64_t n = v.size();
    c.concordant = n * (n - 1) / 2 - c.discordant - c.tied;
    return c;
}

double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

TrendTestResult kendall_tau(std::span<const double> values, double alpha) {
    const std::size_t n = values.size();
    if (n < kMinKendallSamples) throw DataError("sample too small for normal approximation");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("significance level must lie in (0, 1)");

    const PairCounts c = count_pairs(values);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    const double nd = static_cast<double>(n);
    const double pairs = nd * (nd - 1.0) / 2.0;
    const double s = static_cast<double>(c.concordant) - static_cast<double>(c.discordant);
    // Time has no ties, so only the value ties enter the tau-b denominator
    // and the variance of S.
    const double denom = std::sqrt(pairs * (pairs - static_cast<double>(c.tied)));
    const double var_s =
        (nd * (nd - 1.0) * (2.0 * nd + 5.0) - tie_sum(sorted, [](double t) { return t * (t - 1.0) * (2.0 * t + 5.0); })) /
        18.0;

    TrendTestResult r;
    r.n = n;
    r.concordant = c.concordant;
    r.discordant = c.discordant;
    if (denom > 0.0 && var_s > 0.0) {
        r.tau = s / denom;
        r.z = s / std::sqrt(var_s);
        r.p_value = std::min(1.0, two_sided_normal_p(r.z));
    }
    r.significant = r.p_value < alpha;
    return r;
}

TrendTestResult kendall_tau(const FrequencySeries& series, double alpha) {
    return kendall_tau(std::span<const double>(series.frequencies), alpha);
}

FleetTrendTest fleet_trend_test(const FleetDataset& dataset, double alpha, Execution exec) {
    if (dataset.campaign != Campaign::continuous) throw DataError("trend test requires a continuous campaign");
    FleetTrendTest out;
    out.alpha = alpha;
    out.per_series.resize(dataset.series.size());
    for_each_index(exec, dataset.series.size(),
                   [&](std::size_t i) { out.per_series[i] = kendall_tau(dataset.series[i], alpha); });
    std::size_t discarded = 0;
    for (const auto& r : out.per_series) {
        if (r.significant)
            out.retained_taus.push_back(r.tau);
        else
            ++discarded;
    }
    out.discarded_fraction =
        out.per_series.empty() ? 0.0 : static_cast<double>(discarded) / static_cast<double>(out.per_series.size());
    return out;
}

std::vector<RegressionResult> fleet_slopes(const FleetDataset& dataset, Execution exec) {
    std::vector<RegressionResult> out(dataset.series.size());
    for_each_index(exec, dataset.series.size(), [&](std::size_t i) { out[i] = fit_linear(dataset.series[i]); });
    return out;
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) throw DataError("empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Distribution describe(std::span<const double> values) {
    if (values.empty()) throw DataError("empty sample");
    Distribution d;
    d.count = values.size();
    d.min = *std::min_element(values.begin(), values.end());
    d.max = *std::max_element(values.begin(), values.end());
    d.q1 = quantile(values, 0.25);
    d.median = median(values);
    d.q3 = quantile(values, 0.75);
    const double n = static_cast<double>(values.size());
    d.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : values) {
        const double e = v - d.mean;
        m2 += e * e;
        m3 += e * e * e;
    }
    m2 /= n;
    m3 /= n;
    d.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return d;
}

}  // namespace rofleet
