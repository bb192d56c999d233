#include <doctest.h>

#include <cmath>

#include "rofleet/forecast.hpp"
#include "rofleet/metrics.hpp"
#include "rofleet/sim.hpp"
#include "rofleet/trend.hpp"
#include "support.hpp"

using namespace rofleet;

namespace {

const std::vector<ModelSpec>& every_model() {
    static const std::vector<ModelSpec> models{ThetaConfig{}, ThetaConfig{1.5, 0.3}, LagRegressionConfig{{1, 2}, false, {1}},
                                               NaiveConfig{}, DriftConfig{}};
    return models;
}

// One noiseless-truth RO of the default profile and its EWMA trend.
struct ReferenceRo {
    std::vector<double> trend;
    std::vector<double> truth;
};

ReferenceRo reference_ro() {
    SimulationSpec spec;
    spec.devices = 1;
    spec.ros_per_device = 1;
    spec.seed = 42;
    const auto noisy = simulate_fleet(spec, Execution::serial);
    auto clean_spec = spec;
    clean_spec.profile.noise_sigma = 0.0;
    const auto clean = simulate_fleet(clean_spec, Execution::serial);
    return {ewma(noisy.series[0], EwmaConfig{360.0, true}).frequencies, clean.series[0].frequencies};
}

}  // namespace

TEST_SUITE("forecast") {

TEST_CASE("theta on a constant series is exact") {
    const std::vector<double> c(30, 2e8);
    for (double v : theta_forecast(c, 25).values) CHECK(v == 2e8);
    for (double v : theta_forecast(c, 5, {3.0, 0.2}).values) CHECK(v == 2e8);
}

TEST_CASE("theta one-step forecast matches the SES recursion oracle") {
    const auto ap = testing::arithmetic(40, 10.0, 0.5);
    for (double alpha : {0.05, 0.3, 0.8, 0.99}) {
        const auto f = theta_forecast(ap, 1, {2.0, alpha});
        CHECK(std::abs(f.values[0] - testing::theta_oracle(ap, 1, alpha)) < 1e-9);
    }
    const auto fit = fit_theta(ap);
    const auto f = theta_forecast(ap, 1);
    CHECK(std::abs(f.values[0] - testing::theta_oracle(ap, 1, fit.ses_alpha)) < 1e-9);
    CHECK(f.values[0] <= 10.0 + 0.5 * 40);
    CHECK(f.values[0] >= ap.back());
    const auto noisy = testing::white_noise(80, 12, 50.0, 2.0);
    for (std::size_t h : {1u, 7u, 30u}) {
        const auto f = theta_forecast(noisy, h, {2.0, 0.25});
        CHECK(std::abs(f.values[h - 1] - testing::theta_oracle(noisy, h, 0.25)) < 1e-9);
    }
}

TEST_CASE("theta with automatic alpha picks the grid minimum") {
    const auto x = testing::white_noise(100, 31, 5.0, 1.0);
    const auto fit = fit_theta(x);
    std::vector<double> q(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) q[t] = 2.0 * (x[t] - x[0]) - (fit.a + fit.b * static_cast<double>(t));
    for (double a : ses_alpha_grid()) CHECK(ses_sse(q, fit.ses_alpha) <= ses_sse(q, a));
}

TEST_CASE("theta on an exact line with alpha 0.99 stays within 1% of the extrapolation") {
    const auto line = testing::arithmetic(50, 100.0, 2.0);
    const double next = 100.0 + 2.0 * 50;
    const auto f = theta_forecast(line, 1, {2.0, 0.99});
    CHECK(std::abs(f.values[0] - next) <= 0.01 * next);
    CHECK(std::abs(f.values[0] - testing::theta_oracle(line, 1, 0.99)) < 1e-9);
}

TEST_CASE("lag regression continues an arithmetic progression") {
    const auto ap = testing::arithmetic(60, 3.0, 0.75);
    const auto f = lag_regression_forecast(ap, {{1}, false, {1}}, {}, 30);
    for (std::size_t h = 1; h <= 30; ++h) CHECK(std::abs(f.values[h - 1] - (3.0 + 0.75 * static_cast<double>(59 + h))) < 1e-9);
    for (double v : lag_regression_forecast(std::vector<double>(30, 7.0), {{1, 3}, false, {1}}, {}, 10).values)
        CHECK(v == 7.0);
}

TEST_CASE("lag regression preconditions") {
    const auto x = testing::white_noise(50, 2);
    CHECK_THROWS_AS((void)lag_regression_forecast(x, {{2, 1}, false, {1}}, {}, 3), ConfigError);
    CHECK_THROWS_AS((void)lag_regression_forecast(x, {{1}, true, {1}}, {}, 3), DataError);
    const CovariateMatrix duplicate{x, x};
    CHECK_THROWS_AS((void)lag_regression_forecast(x, {{1}, true, {1}}, duplicate, 3), NumericalError);
    CHECK_THROWS_AS((void)lag_regression_forecast(testing::arithmetic(4, 0, 1), {{3}, false, {1}}, {}, 3), DataError);
}

TEST_CASE("baselines") {
    const auto ap = testing::arithmetic(20, 1.0, 2.0);
    const auto drift = drift_forecast(ap, 5);
    const auto naive = naive_forecast(ap, 5);
    for (std::size_t h = 1; h <= 5; ++h) {
        CHECK(drift.values[h - 1] == doctest::Approx(ap.back() + 2.0 * static_cast<double>(h)));
        CHECK(naive.values[h - 1] == ap.back());
    }
    CHECK(drift.values[4] - naive.values[4] == doctest::Approx(5 * 2.0));
    for (double v : drift_forecast(std::vector<double>(5, 3.0), 4).values) CHECK(v == 3.0);
}

TEST_CASE("forecasters are translation-equivariant with finite output of length H") {
    const auto x = testing::white_noise(120, 8, 10.0, 1.0);
    std::vector<double> moved(x);
    for (auto& v : moved) v += 1e4;
    for (const auto& m : every_model()) {
        const auto a = run_model(m, x, {}, 17);
        const auto b = run_model(m, moved, {}, 17);
        REQUIRE(a.values.size() == 17);
        for (std::size_t h = 0; h < 17; ++h) {
            CHECK(std::isfinite(a.values[h]));
            CHECK(b.values[h] - 1e4 == doctest::Approx(a.values[h]).epsilon(1e-8));
        }
    }
}

TEST_CASE("model descriptions") {
    CHECK(describe(ThetaConfig{}) == "theta(theta=2,alpha=auto)");
    CHECK(describe(LagRegressionConfig{{1, 2}, true, {1}}) == "lag_regression(lags=[1,2],covariate_lags=[1])");
    CHECK(model_name(DriftConfig{}) == "drift");
    CHECK(uses_covariates(LagRegressionConfig{{1}, true, {1}}));
}

TEST_CASE("random search") {
    const auto x = testing::white_noise(200, 4, 100.0, 1.0);
    const auto one = random_search(ModelFamily::theta, x, {}, 1, 9);
    REQUIRE(one.trials.size() == 1);
    CHECK(describe(one.best) == describe(one.trials[0].config));
    CHECK(one.best_mape == one.trials[0].mape);

    const auto small = random_search(ModelFamily::lag_regression, x, {}, 5, 9);
    const auto large = random_search(ModelFamily::lag_regression, x, {}, 20, 9);
    for (std::size_t k = 0; k < 5; ++k) CHECK(describe(small.trials[k].config) == describe(large.trials[k].config));
    CHECK(large.best_mape <= small.best_mape);
    CHECK_THROWS_AS((void)random_search(ModelFamily::theta, x, {}, 0, 9), ConfigError);
}

TEST_CASE("reference-scale trend: theta within 0.02% of truth over 60 steps, search beats naive") {
    const auto ro = reference_ro();
    const std::size_t h = 60;
    const std::size_t cut = ro.trend.size() - h;
    const std::span<const double> history(ro.trend.data(), cut);
    const std::span<const double> truth(ro.truth.data() + cut, h);
    const auto f = theta_forecast(history, h);
    CHECK(mape(truth, f.values) <= 0.02);

    const auto search = random_search(ModelFamily::theta, ro.trend, {}, 10, 3);
    const std::size_t train = ro.trend.size() * 3 / 4;
    const std::span<const double> head(ro.trend.data(), train);
    const std::span<const double> tail(ro.trend.data() + train, ro.trend.size() - train);
    const double naive = mape(tail, naive_forecast(head, tail.size()).values);
    CHECK(search.best_mape < naive);
}

}
