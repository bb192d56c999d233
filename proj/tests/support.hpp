#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rofleet/core.hpp"
#include "rofleet/sim.hpp"

namespace testing {

inline rofleet::TimePoint epoch() { return rofleet::TimePoint{std::chrono::sys_days{std::chrono::year{2023} / 1 / 1}}; }

inline rofleet::FrequencySeries make_series(const std::vector<double>& values, rofleet::Duration cadence = rofleet::Duration{7200},
                                            std::string device = "dev000", std::string ro = "ro000",
                                            rofleet::GridLocation loc = {0, 0}) {
    rofleet::FrequencySeries s{std::move(device), std::move(ro), loc, {}, values};
    for (std::size_t i = 0; i < values.size(); ++i)
        s.timestamps.push_back(epoch() + cadence * static_cast<rofleet::Duration::rep>(i));
    return s;
}

inline std::vector<double> arithmetic(std::size_t n, double start, double step) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = start + step * static_cast<double>(i);
    return v;
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(mean, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

inline double variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

// Direct O(n^2) tau-b from its definition.
struct BruteKendall {
    std::int64_t concordant = 0;
    std::int64_t discordant = 0;
    double tau = 0.0;
};

inline BruteKendall brute_kendall(const std::vector<double>& y) {
    BruteKendall r;
    std::int64_t ties = 0;
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (y[j] > y[i]) ++r.concordant;
            else if (y[j] < y[i]) ++r.discordant;
            else ++ties;
        }
    const double n0 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double denom = std::sqrt(n0 * (n0 - static_cast<double>(ties)));
    r.tau = denom > 0.0 ? static_cast<double>(r.concordant - r.discordant) / denom : 0.0;
    return r;
}

// Plain simple exponential smoothing, level started at the first value.
inline std::vector<double> ses_levels(const std::vector<double>& x, double alpha) {
    std::vector<double> level(x.size());
    level[0] = x[0];
    for (std::size_t t = 1; t < x.size(); ++t) level[t] = alpha * x[t] + (1.0 - alpha) * level[t - 1];
    return level;
}

// Equal-weight theta forecast recomputed by hand: OLS line extrapolated plus
// SES of the doubled-deviation line, halved.
inline double theta_oracle(const std::vector<double>& x, std::size_t h, double alpha) {
    const double n = static_cast<double>(x.size());
    double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double tt = static_cast<double>(t);
        st += tt;
        sx += x[t];
        stt += tt * tt;
        stx += tt * x[t];
    }
    const double b = (n * stx - st * sx) / (n * stt - st * st);
    const double a = (sx - b * st) / n;
    std::vector<double> q(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) q[t] = 2.0 * x[t] - (a + b * static_cast<double>(t));
    const double level = ses_levels(q, alpha).back();
    const double line = a + b * (n - 1.0 + static_cast<double>(h));
    return 0.5 * line + 0.5 * level;
}

inline rofleet::SimulationSpec small_fleet(std::size_t devices = 4, std::size_t ros = 4, int span_days = 60) {
    rofleet::SimulationSpec spec;
    spec.devices = devices;
    spec.ros_per_device = ros;
    spec.span = rofleet::kDay * span_days;
    spec.profile.horizon = spec.span;
    spec.seed = 7;
    return spec;
}

}  // namespace testing
