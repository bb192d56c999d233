#include "rofleet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

namespace rofleet {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void check_profile(const DegradationProfile& p) {
    if (p.horizon <= Duration::zero()) throw ConfigError("degradation horizon must be positive");
    if (!(p.exponent > 0.0 && p.exponent <= 1.0))
        throw ConfigError("degradation exponent must lie in (0, 1]");
    if (!(p.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
    if (!(p.shift_spread >= 0.0)) throw ConfigError("shift_spread must be non-negative");
    if (!(p.noise_ar1 >= 0.0 && p.noise_ar1 < 1.0)) throw ConfigError("noise_ar1 must lie in [0, 1)");
    if (!std::isfinite(p.total_shift) || p.total_shift <= -1.0)
        throw ConfigError("total_shift must be finite and greater than -1");
}

void check_spec(const SimulationSpec& spec) {
    if (spec.devices == 0 || spec.ros_per_device == 0)
        throw ConfigError("device and RO counts must be positive");
    if (spec.cadence <= Duration::zero() || spec.cadence >= spec.span)
        throw ConfigError("cadence must be positive and shorter than the span");
    if (spec.physical.n_stages < 3 || spec.physical.n_stages % 2 == 0)
        throw ConfigError("n_stages must be odd and at least 3");
    if (!(spec.physical.t_p0 > 0.0)) throw ConfigError("t_p0 must be positive");
    if (spec.fabric.columns <= 0 || spec.fabric.rows <= 0)
        throw ConfigError("fabric size must be positive");
    check_profile(spec.profile);
    std::set<std::string> names;
    for (std::size_t d = 0; d < spec.devices; ++d) names.insert(device_name(d));
    for (const auto& a : spec.anomalies) {
        if (!names.contains(a.device_id))
            throw ConfigError("anomaly refers to unknown device '" + a.device_id + "'");
        if (!std::isfinite(a.extra_shift)) throw ConfigError("anomaly extra_shift must be finite");
    }
}

// Unit-variance noise stream, optionally AR(1)-correlated.
class NoiseStream {
public:
    NoiseStream(std::mt19937_64& rng, double phi) : rng_(rng), phi_(phi), scale_(std::sqrt(1.0 - phi * phi)) {}

    double next() {
        const double z = normal_(rng_);
        state_ = first_ ? z : phi_ * state_ + scale_ * z;
        first_ = false;
        return state_;
    }

private:
    std::mt19937_64& rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double phi_;
    double scale_;
    double state_ = 0.0;
    bool first_ = true;
};

struct RoPlan {
    std::string device_id;
    std::string ro_id;
    GridLocation location;
    double shift;
};

std::vector<RoPlan> plan_fleet(const SimulationSpec& spec) {
    const auto layout = ro_layout(spec.ros_per_device, spec.fabric);
    std::vector<RoPlan> plan;
    plan.reserve(spec.devices * spec.ros_per_device);
    for (std::size_t d = 0; d < spec.devices; ++d) {
        for (std::size_t r = 0; r < spec.ros_per_device; ++r) {
            RoPlan p{device_name(d), ro_name(r), layout[r], 0.0};
            p.shift = effective_total_shift(spec, p.device_id, p.ro_id, p.location);
            plan.push_back(std::move(p));
        }
    }
    return plan;
}

}  // namespace

double ro_frequency(const RoPhysicalConfig& cfg, double t_p) {
    if (cfg.n_stages <= 0 || cfg.n_stages % 2 == 0)
        throw ConfigError("ring oscillator needs an odd, positive number of stages");
    if (!(t_p > 0.0)) throw ConfigError("propagation delay must be positive");
    return 1.0 / (2.0 * static_cast<double>(cfg.n_stages) * t_p);
}

double nominal_frequency(const RoPhysicalConfig& cfg) { return ro_frequency(cfg, cfg.t_p0); }

std::string device_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "dev%03zu", index);
    return buf;
}

std::string ro_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ro%03zu", index);
    return buf;
}

std::vector<GridLocation> ro_layout(std::size_t count, FabricSize fabric) {
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    const std::size_t rows = (count + cols - 1) / cols;
    std::vector<GridLocation> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t c = i % cols;
        const std::size_t r = i / cols;
        // Cell centres of a cols x rows partition of the fabric.
        const int x = static_cast<int>((2 * c + 1) * static_cast<std::size_t>(fabric.columns) / (2 * cols));
        const int y = static_cast<int>((2 * r + 1) * static_cast<std::size_t>(fabric.rows) / (2 * rows));
        out.push_back({x, y});
    }
    return out;
}

SpatialField hotspot_field(const std::vector<GridLocation>& locations, GridLocation center,
                           double radius, double gain) {
    if (!(radius > 0.0)) throw ConfigError("hotspot radius must be positive");
    SpatialField field;
    for (const auto& loc : locations) {
        const double dx = loc.x - center.x;
        const double dy = loc.y - center.y;
        field[loc] = 1.0 + gain * std::exp(-(dx * dx + dy * dy) / (2.0 * radius * radius));
    }
    return field;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view device_id, std::string_view ro_id) {
    std::uint64_t h = fnv1a(device_id);
    h = fnv1a("/", h);
    h = fnv1a(ro_id, h);
    return splitmix64(splitmix64(root) ^ h);
}

double draw_total_shift(const DegradationProfile& profile, std::uint64_t seed, std::string_view device_id,
                        std::string_view ro_id) {
    if (profile.total_shift == 0.0) return 0.0;
    // Separate stream from the noise so the draw does not depend on series length.
    std::mt19937_64 rng(splitmix64(derive_seed(seed, device_id, ro_id) ^ 0x5bd1e995ULL));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double magnitude = std::abs(profile.total_shift) * std::exp(profile.shift_spread * normal(rng));
    return std::copysign(magnitude, profile.total_shift);
}

double effective_total_shift(const SimulationSpec& spec, std::string_view device_id, std::string_view ro_id,
                             GridLocation location) {
    double s = draw_total_shift(spec.profile, spec.seed, device_id, ro_id);
    if (auto it = spec.profile.spatial_field.find(location); it != spec.profile.spatial_field.end())
        s *= it->second;
    for (const auto& a : spec.anomalies)
        if (a.device_id == device_id) s += a.extra_shift;
    return s;
}

double drift_fraction(const DegradationProfile& profile, Duration elapsed) {
    if (elapsed <= Duration::zero()) return 0.0;
    const double u = static_cast<double>(elapsed.count()) / static_cast<double>(profile.horizon.count());
    return std::pow(u, profile.exponent);
}

FleetDataset simulate_fleet(const SimulationSpec& spec, Execution exec) {
    check_spec(spec);
    const auto plan = plan_fleet(spec);
    const double f0 = nominal_frequency(spec.physical);
    const auto samples = static_cast<std::size_t>(spec.span / spec.cadence) + 1;

    std::vector<TimePoint> times(samples);
    std::vector<double> drift(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const Duration elapsed = spec.cadence * static_cast<Duration::rep>(k);
        times[k] = spec.start + elapsed;
        drift[k] = drift_fraction(spec.profile, elapsed);
    }

    FleetDataset out;
    out.campaign = Campaign::continuous;
    out.sample_period = spec.cadence;
    out.series.resize(plan.size());
    for_each_index(exec, plan.size(), [&](std::size_t i) {
        const RoPlan& p = plan[i];
        FrequencySeries s{p.device_id, p.ro_id, p.location, times, std::vector<double>(samples)};
        std::mt19937_64 rng(derive_seed(spec.seed, p.device_id, p.ro_id));
        NoiseStream noise(rng, spec.profile.noise_ar1);
        for (std::size_t k = 0; k < samples; ++k) {
            const double clean = f0 * (1.0 + p.shift * drift[k]);
            s.frequencies[k] = spec.profile.noise_sigma > 0.0
                                   ? clean * (1.0 + spec.profile.noise_sigma * noise.next())
                                   : clean;
        }
        out.series[i] = std::move(s);
    });
    return out;
}

FleetDataset simulate_shutdown(const SimulationSpec& spec, std::size_t repeats, Execution exec) {
    check_spec(spec);
    if (repeats == 0) throw ConfigError("shutdown campaign needs at least one repeat");
    const auto plan = plan_fleet(spec);
    const double f0 = nominal_frequency(spec.physical);

    std::vector<TimePoint> times;
    std::vector<double> drift;
    for (TimePoint epoch : {spec.start, spec.start + spec.span}) {
        for (std::size_t k = 0; k < repeats; ++k) {
            times.push_back(epoch + Duration{static_cast<Duration::rep>(k)});
            drift.push_back(drift_fraction(spec.profile, times.back() - spec.start));
        }
    }

    FleetDataset out;
    out.campaign = Campaign::shutdown;
    out.series.resize(plan.size());
    for_each_index(exec, plan.size(), [&](std::size_t i) {
        const RoPlan& p = plan[i];
        FrequencySeries s{p.device_id, p.ro_id, p.location, times, std::vector<double>(times.size())};
        std::mt19937_64 rng(derive_seed(spec.seed, p.device_id, p.ro_id));
        NoiseStream noise(rng, spec.profile.noise_ar1);
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double clean = f0 * (1.0 + p.shift * drift[k]);
            s.frequencies[k] = spec.profile.noise_sigma > 0.0
                                   ? clean * (1.0 + spec.profile.noise_sigma * noise.next())
                                   : clean;
        }
        out.series[i] = std::move(s);
    });
    return out;
}

namespace {

struct CovariateModel {
    const char* name;
    double nominal;
    double noise;    // per-sample std
    double plateau;  // std of the weekly operating-point offset
};

// Rails in volts, temperatures in degrees Celsius, currents in amperes.
constexpr CovariateModel kCovariates[] = {
    {"core-voltage", 1.0, 0.002, 0.004},
    {"ddr-voltage", 1.5, 0.003, 0.005},
    {"1v8-voltage", 1.8, 0.003, 0.006},
    {"2v5-voltage", 2.5, 0.004, 0.008},
    {"payload-voltage", 12.0, 0.02, 0.05},
    {"management-voltage", 3.3, 0.005, 0.01},
    {"die-temperature", 55.0, 0.5, 2.0},
    {"board-temperature", 40.0, 0.4, 1.5},
    {"refrigeration-inlet-temperature", 18.0, 0.2, 0.8},
    {"refrigeration-inner-temperature", 24.0, 0.3, 1.0},
    {"refrigeration-outlet-temperature", 30.0, 0.3, 1.2},
    {"rtm-management-current", 0.4, 0.01, 0.02},
    {"rtm-payload-current", 3.0, 0.05, 0.15},
};

}  // namespace

const std::vector<std::string>& covariate_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& c : kCovariates) v.emplace_back(c.name);
        return v;
    }();
    return names;
}

std::vector<CovariateSeries> simulate_covariates(const FleetDataset& dataset, std::uint64_t seed) {
    if (dataset.campaign != Campaign::continuous)
        throw DataError("covariates require continuous campaign");
    if (dataset.series.empty()) throw DataError("cannot simulate covariates for an empty dataset");

    // First series of each device defines its sampling instants.
    std::map<std::string, const FrequencySeries*> devices;
    for (const auto& s : dataset.series) devices.try_emplace(s.device_id, &s);

    constexpr Duration plateau_length = 7 * kDay;
    std::vector<CovariateSeries> out;
    for (const auto& [device, series] : devices) {
        if (series->empty()) throw DataError("series " + series_key(*series) + " is empty");
        for (const auto& model : kCovariates) {
            std::mt19937_64 rng(derive_seed(seed, device, std::string("covariate:") + model.name));
            std::normal_distribution<double> normal(0.0, 1.0);
            CovariateSeries c{device, model.name, series->timestamps, {}};
            c.values.reserve(c.timestamps.size());
            const TimePoint origin = c.timestamps.front();
            long current_block = -1;
            double offset = 0.0;
            for (const TimePoint t : c.timestamps) {
                const long block = static_cast<long>((t - origin) / plateau_length);
                if (block != current_block) {
                    current_block = block;
                    offset = model.plateau * normal(rng);
                }
                c.values.push_back(model.nominal + offset + model.noise * normal(rng));
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

}  // namespace rofleet
