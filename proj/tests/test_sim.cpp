#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rofleet/sim.hpp"
#include "support.hpp"

using namespace rofleet;

TEST_SUITE("sim") {

TEST_CASE("ring oscillator frequency") {
    RoPhysicalConfig three{3, 1e-9};
    CHECK(ro_frequency(three, 1e-9) == doctest::Approx(166666666.7).epsilon(1e-9));
    RoPhysicalConfig one{1, 0.5};
    CHECK(ro_frequency(one, 0.5) == 1.0);
    CHECK_THROWS_AS((void)ro_frequency({4, 1e-9}, 1e-9), ConfigError);
    CHECK_THROWS_AS((void)ro_frequency(three, 0.0), ConfigError);
    CHECK(nominal_frequency({}) == doctest::Approx(200e6).epsilon(1e-12));
}

TEST_CASE("no drift and no noise gives constant series") {
    auto spec = testing::small_fleet();
    spec.profile.total_shift = 0.0;
    spec.profile.noise_sigma = 0.0;
    const auto ds = simulate_fleet(spec, Execution::serial);
    const double f0 = nominal_frequency(spec.physical);
    for (const auto& s : ds.series)
        for (double f : s.frequencies) CHECK(f == f0);
}

TEST_CASE("linear drift ends exactly at the configured shift") {
    auto spec = testing::small_fleet();
    spec.profile.noise_sigma = 0.0;
    spec.profile.exponent = 1.0;
    spec.profile.shift_spread = 0.0;
    const auto ds = simulate_fleet(spec, Execution::serial);
    const double f0 = nominal_frequency(spec.physical);
    for (const auto& s : ds.series) {
        CHECK(s.timestamps.back() - s.timestamps.front() == spec.span);
        CHECK(std::abs(s.frequencies.back() / f0 - (1.0 - 6.4e-4)) < 1e-12);
    }
}

TEST_CASE("realized shift at the horizon equals the drawn shift") {
    auto spec = testing::small_fleet(5, 6);
    spec.profile.noise_sigma = 0.0;
    const auto ds = simulate_fleet(spec, Execution::serial);
    const double f0 = nominal_frequency(spec.physical);
    for (const auto& s : ds.series) {
        const double drawn = draw_total_shift(spec.profile, spec.seed, s.device_id, s.ro_id);
        const double realized = s.frequencies.back() / f0 - 1.0;
        CHECK(std::abs(realized - drawn) <= 1e-12 * std::abs(drawn));
    }
}

TEST_CASE("median drawn shift converges to the configured total") {
    DegradationProfile profile;
    std::vector<double> draws;
    for (std::size_t d = 0; d < 250; ++d)
        for (std::size_t r = 0; r < 8; ++r) draws.push_back(draw_total_shift(profile, 99, device_name(d), ro_name(r)));
    REQUIRE(draws.size() == 2000);
    CHECK(std::abs(median(draws) / profile.total_shift - 1.0) < 0.05);
    CHECK(std::all_of(draws.begin(), draws.end(), [](double s) { return s < 0.0; }));
}

TEST_CASE("same seed is bit-identical, different seed differs") {
    const auto spec = testing::small_fleet();
    const auto a = simulate_fleet(spec, Execution::serial);
    const auto b = simulate_fleet(spec, Execution::serial);
    auto other = spec;
    other.seed = spec.seed + 1;
    const auto c = simulate_fleet(other, Execution::serial);
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        CHECK(a.series[i].frequencies == b.series[i].frequencies);
        CHECK(a.series[i].frequencies != c.series[i].frequencies);
    }
}

TEST_CASE("anomalies change only their device") {
    const auto spec = testing::small_fleet();
    auto injected = spec;
    injected.anomalies.push_back({"dev002", -0.1});
    const auto a = simulate_fleet(spec, Execution::serial);
    const auto b = simulate_fleet(injected, Execution::serial);
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        if (a.series[i].device_id == "dev002")
            CHECK(a.series[i].frequencies != b.series[i].frequencies);
        else
            CHECK(a.series[i].frequencies == b.series[i].frequencies);
    }
    auto unknown = spec;
    unknown.anomalies.push_back({"dev999", -0.1});
    CHECK_THROWS_AS((void)simulate_fleet(unknown), ConfigError);
}

TEST_CASE("simulated datasets validate") {
    auto spec = testing::small_fleet();
    spec.profile.noise_ar1 = 0.5;
    auto ds = simulate_fleet(spec);
    CHECK(validate(ds).empty());
    ds.covariates = simulate_covariates(ds, spec.seed);
    CHECK(validate(ds).empty());
    const auto shutdown = simulate_shutdown(spec, 20);
    CHECK(shutdown.campaign == Campaign::shutdown);
    CHECK(validate(shutdown).empty());
    CHECK(shutdown.series.front().size() == 40);
}

TEST_CASE("layout and hotspot field") {
    const auto locs = ro_layout(8, {200, 200});
    REQUIRE(locs.size() == 8);
    auto sorted = locs;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    const auto field = hotspot_field(locs, locs[4], 30.0, 2.0);
    CHECK(field.at(locs[4]) == 3.0);
    for (const auto& [loc, m] : field) CHECK(m <= 3.0);
    CHECK_THROWS_AS((void)hotspot_field(locs, locs[0], 0.0, 1.0), ConfigError);
}

TEST_CASE("drift fraction") {
    DegradationProfile p;
    p.horizon = kDay * 100;
    p.exponent = 0.5;
    CHECK(drift_fraction(p, Duration{0}) == 0.0);
    CHECK(drift_fraction(p, kDay * 25) == doctest::Approx(0.5));
    CHECK(drift_fraction(p, kDay * 100) == 1.0);
}

TEST_CASE("invalid specs are rejected") {
    auto spec = testing::small_fleet();
    spec.profile.exponent = 1.5;
    CHECK_THROWS_AS((void)simulate_fleet(spec), ConfigError);
    spec = testing::small_fleet();
    spec.physical.n_stages = 1;
    CHECK_THROWS_AS((void)simulate_fleet(spec), ConfigError);
    spec = testing::small_fleet();
    spec.devices = 0;
    CHECK_THROWS_AS((void)simulate_fleet(spec), ConfigError);
}

TEST_CASE("covariates") {
    auto spec = testing::small_fleet(2, 3, 20);
    const auto ds = simulate_fleet(spec);
    const auto cov = simulate_covariates(ds, 5);
    REQUIRE(cov.size() == 13 * 2);
    CHECK(covariate_names().size() == 13);
    for (const auto& c : cov) {
        CHECK(c.values.size() == ds.series.front().size());
        CHECK(c.timestamps == ds.series.front().timestamps);
    }
    const auto again = simulate_covariates(ds, 5);
    for (std::size_t i = 0; i < cov.size(); ++i) CHECK(cov[i].values == again[i].values);
    CHECK_THROWS_AS((void)simulate_covariates(FleetDataset{}, 5), DataError);
    CHECK_THROWS_AS((void)simulate_covariates(simulate_shutdown(spec, 5), 5), DataError);
}

}
