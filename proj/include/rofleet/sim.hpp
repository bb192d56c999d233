#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rofleet/core.hpp"
#include "rofleet/parallel.hpp"

namespace rofleet {

/// Inverter chain of a ring oscillator.
struct RoPhysicalConfig {
    int n_stages = 7;
    double t_p0 = 1.0 / (2.0 * 7.0 * 200e6);  // seconds per stage, ~200 MHz nominal
};

/// Oscillation frequency of an n-stage ring with per-stage delay t_p:
/// f = 1 / (2 n t_p). Requires an odd positive stage count and t_p > 0.
[[nodiscard]] double ro_frequency(const RoPhysicalConfig& cfg, double t_p);

/// Nominal (unaged) frequency of the configured oscillator.
[[nodiscard]] double nominal_frequency(const RoPhysicalConfig& cfg);

/// Multiplier applied to an RO's drawn shift, keyed by placement.
/// Locations missing from the map use a multiplier of 1.
using SpatialField = std::map<GridLocation, double>;

struct DegradationProfile {
    double total_shift = -6.4e-4;   // median relative change at `horizon`
    Duration horizon = 280 * kDay;
    double exponent = 0.2;          // power-law time exponent, (0, 1]
    double noise_sigma = 1e-4;      // relative white-noise std
    double shift_spread = 0.5;      // log-normal sigma of |per-RO shift|
    double noise_ar1 = 0.0;         // AR(1) coefficient of the noise, [0, 1)
    SpatialField spatial_field;
};

struct AnomalySpec {
    std::string device_id;
    double extra_shift = 0.0;
};

struct FabricSize {
    int columns = 200;
    int rows = 200;
};

struct SimulationSpec {
    std::size_t devices = 10;
    std::size_t ros_per_device = 8;
    Duration cadence{7200};
    Duration span = 280 * kDay;
    TimePoint start{std::chrono::sys_days{std::chrono::year{2023} / 1 / 1}};
    RoPhysicalConfig physical;
    DegradationProfile profile;
    std::vector<AnomalySpec> anomalies;
    FabricSize fabric;
    std::uint64_t seed = 1;
};

[[nodiscard]] std::string device_name(std::size_t index);
[[nodiscard]] std::string ro_name(std::size_t index);

/// Placement of `count` ROs on a near-square lattice spread over the fabric.
/// Every device of a fleet shares this layout.
[[nodiscard]] std::vector<GridLocation> ro_layout(std::size_t count, FabricSize fabric);

/// Gaussian bump of extra degradation: multiplier 1 + gain * exp(-d^2 / 2r^2).
[[nodiscard]] SpatialField hotspot_field(const std::vector<GridLocation>& locations,
                                         GridLocation center, double radius, double gain);

/// Seed of the private random stream of one RO, derived from the root seed
/// and a stable hash of its identity.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t root, std::string_view device_id,
                                        std::string_view ro_id);

/// Per-RO total shift drawn around profile.total_shift (negated log-normal
/// magnitude when the target is negative). Spatial field and anomalies are
/// not applied.
[[nodiscard]] double draw_total_shift(const DegradationProfile& profile, std::uint64_t seed,
                                      std::string_view device_id, std::string_view ro_id);

/// Shift actually realized at `horizon`: drawn shift times spatial
/// multiplier plus any anomaly offset of the device.
[[nodiscard]] double effective_total_shift(const SimulationSpec& spec, std::string_view device_id,
                                           std::string_view ro_id, GridLocation location);

/// Noise-free relative drift fraction (t / horizon)^exponent.
[[nodiscard]] double drift_fraction(const DegradationProfile& profile, Duration elapsed);

/// Continuous campaign: one sample per cadence over the span for every RO.
/// Deterministic given spec.seed, independent of the execution policy.
[[nodiscard]] FleetDataset simulate_fleet(const SimulationSpec& spec,
                                          Execution exec = Execution::parallel);

/// Shutdown campaign: two measurement epochs (at start and at start + span),
/// each holding `repeats` back-to-back samples per RO.
[[nodiscard]] FleetDataset simulate_shutdown(const SimulationSpec& spec, std::size_t repeats = 100,
                                             Execution exec = Execution::parallel);

/// Identifiers of the environmental covariates recorded next to the ROs:
/// six supply rails, five temperatures and two currents.
[[nodiscard]] const std::vector<std::string>& covariate_names();

/// Plateau-plus-noise covariate traces for every device, sampled on the
/// device's frequency timestamps.
[[nodiscard]] std::vector<CovariateSeries> simulate_covariates(const FleetDataset& dataset,
                                                               std::uint64_t seed);

}  // namespace rofleet
