#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rofleet/trend.hpp"
#include "support.hpp"

using namespace rofleet;

TEST_SUITE("trend") {

TEST_CASE("half-life to smoothing factor") {
    CHECK(half_life_to_alpha(1.0) == 0.5);
    // weights (1 - alpha)^30 must halve exactly
    CHECK(std::pow(1.0 - half_life_to_alpha(30.0), 30.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(half_life_to_alpha(30.0) == doctest::Approx(1.0 - std::pow(2.0, -1.0 / 30.0)).epsilon(1e-14));
    CHECK_THROWS_AS((void)half_life_to_alpha(0.0), ConfigError);
    CHECK_THROWS_AS((void)half_life_to_alpha(-2.0), ConfigError);
    CHECK(half_life_in_samples(kDay * 30, Duration{7200}) == 360.0);
}

TEST_CASE("ewma hand values") {
    const auto c = ewma(std::vector<double>(50, 4.25), 0.1);
    for (double v : c) CHECK(v == doctest::Approx(4.25).epsilon(1e-15));
    const auto y = ewma(std::vector<double>{0.0, 1.0}, 0.5, true);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    const auto u = ewma(std::vector<double>{0.0, 1.0}, 0.5, false);
    CHECK(u[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS((void)ewma(std::vector<double>{}, 0.5), DataError);
}

TEST_CASE("ewma reduces white-noise variance, more with longer half-life") {
    const auto noise = testing::white_noise(5000, 21);
    double previous = testing::variance(noise);
    for (double tau : {1.0, 3.0, 10.0, 30.0, 100.0}) {
        const auto smooth = ewma(noise, half_life_to_alpha(tau));
        const double v = testing::variance(smooth);
        CHECK(v < previous);
        previous = v;
    }
}

TEST_CASE("ewma is bounded and translation-equivariant") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = testing::white_noise(300, seed, 5.0, 2.0);
        const double alpha = 0.01 + 0.045 * static_cast<double>(seed);
        const auto y = ewma(x, alpha);
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        for (double v : y) {
            CHECK(v >= *lo - 1e-12);
            CHECK(v <= *hi + 1e-12);
        }
        std::vector<double> shifted(x);
        for (auto& v : shifted) v += 1000.0;
        const auto ys = ewma(shifted, alpha);
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(ys[i] - 1000.0 == doctest::Approx(y[i]).epsilon(1e-9));
    }
}

TEST_CASE("loess reproduces lines and constants") {
    const auto line = testing::make_series(testing::arithmetic(200, 2e8, -3.5));
    const auto fit = loess_trend(line, {0.3, 1});
    for (std::size_t i = 0; i < line.size(); ++i)
        CHECK(std::abs(fit.frequencies[i] - line.frequencies[i]) <= 1e-9 * std::abs(line.frequencies[i]));
    const auto flat = loess_trend(testing::make_series(std::vector<double>(40, 7.0)), {0.5, 1});
    for (double v : flat.frequencies) CHECK(v == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("loess is affine-exact on irregular timestamps and translation-equivariant") {
    auto s = testing::make_series(std::vector<double>(60, 0.0));
    for (std::size_t i = 0; i < s.size(); ++i) {
        s.timestamps[i] = testing::epoch() + Duration{static_cast<Duration::rep>(i * i * 37 + i * 600)};
        const double t = static_cast<double>((s.timestamps[i] - s.timestamps[0]).count());
        s.frequencies[i] = 1e5 + 0.25 * t;
    }
    const auto fit = loess_trend(s, {0.2, 1});
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(std::abs(fit.frequencies[i] - s.frequencies[i]) <= 1e-9 * std::abs(s.frequencies[i]));

    auto noisy = testing::make_series(testing::white_noise(120, 4, 10.0, 1.0));
    auto moved = noisy;
    for (auto& v : moved.frequencies) v += 250.0;
    const auto a = loess_trend(noisy, {0.3, 1});
    const auto b = loess_trend(moved, {0.3, 1});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b.frequencies[i] - 250.0 == doctest::Approx(a.frequencies[i]).epsilon(1e-9));
}

TEST_CASE("loess on a noisy line stays closer than the noise") {
    const auto truth = testing::arithmetic(400, 100.0, 0.05);
    const auto noise = testing::white_noise(400, 8, 0.0, 1.0);
    std::vector<double> noisy(400);
    double noise_amp = 0.0;
    for (std::size_t i = 0; i < 400; ++i) {
        noisy[i] = truth[i] + noise[i];
        noise_amp = std::max(noise_amp, std::abs(noise[i]));
    }
    const auto fit = loess_trend(testing::make_series(noisy), {0.5, 1});
    double worst = 0.0;
    for (std::size_t i = 0; i < 400; ++i) worst = std::max(worst, std::abs(fit.frequencies[i] - truth[i]));
    CHECK(worst < noise_amp);
}

TEST_CASE("loess preconditions") {
    const auto s = testing::make_series(testing::arithmetic(10, 1.0, 1.0));
    CHECK_THROWS_AS((void)loess_trend(s, {0.3, 1}), DataError);
    CHECK_THROWS_AS((void)loess_trend(s, {0.5, 2}), ConfigError);
    CHECK_THROWS_AS((void)loess_trend(s, {1.5, 1}), ConfigError);
}

TEST_CASE("epoch shift") {
    const auto a = testing::make_series({2e8, 2e8, 2e8});
    CHECK(epoch_shift(a, a).delta == 0.0);
    const auto b = testing::make_series({199.9008e6, 199.9008e6});
    CHECK(epoch_shift(a, b).delta == doctest::Approx(-4.96e-4).epsilon(1e-9));
    const auto h = testing::make_series({100.0});
    const auto n = testing::make_series({99.0});
    CHECK(epoch_shift(h, n).delta == doctest::Approx(-0.01).epsilon(1e-12));
    auto other = n;
    other.ro_id = "ro001";
    CHECK_THROWS_AS((void)epoch_shift(h, other), DataError);
}

TEST_CASE("epoch shift antisymmetry") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto x = testing::make_series(testing::white_noise(15, seed, 100.0, 3.0));
        const auto y = testing::make_series(testing::white_noise(15, seed + 100, 100.0, 3.0));
        const auto ab = epoch_shift(x, y);
        const auto ba = epoch_shift(y, x);
        CHECK(ab.delta == doctest::Approx(-ba.delta * (ba.f0_median / ab.f0_median)).epsilon(1e-12));
    }
}

TEST_CASE("window shift") {
    const auto flat = testing::make_series(std::vector<double>(12 * 100 + 1, 5.0));
    CHECK(window_shift(flat, kDay * 30).delta == 0.0);
    CHECK_THROWS_AS((void)window_shift(flat, kDay * 51), DataError);

    // Linear ramp over 100 days: window medians sit 15 days from each end.
    const auto ramp = testing::make_series(testing::arithmetic(12 * 100 + 1, 1000.0, -0.01));
    const auto r = window_shift(ramp, kDay * 30);
    CHECK(r.f0_median == doctest::Approx(1000.0 - 0.01 * (12 * 15 - 0.5)));
    CHECK(r.f1_median == doctest::Approx(1000.0 - 0.01 * (12 * 85 + 0.5)));
}

TEST_CASE("resample and epoch split") {
    auto s = testing::make_series({0.0, 10.0, 20.0}, Duration{100});
    s.timestamps[2] = s.timestamps[0] + Duration{400};
    const auto r = resample(s, Duration{100});
    REQUIRE(r.size() == 5);
    CHECK(r.frequencies[1] == 10.0);
    CHECK(r.frequencies[2] == doctest::Approx(10.0 + 10.0 / 3.0));
    CHECK(r.frequencies[3] == doctest::Approx(10.0 + 20.0 / 3.0));
    CHECK(r.frequencies[4] == 20.0);
    auto e = testing::make_series({1, 2, 3, 4}, Duration{10});
    e.timestamps[2] += kDay * 5;
    e.timestamps[3] += kDay * 5;
    const auto epochs = split_epochs(e, kDay);
    REQUIRE(epochs.size() == 2);
    CHECK(epochs[1].frequencies == std::vector<double>{3, 4});
}

}
