#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rofleet/core.hpp"

namespace rofleet {

/// Classic theta method: the theta=0 line (OLS trend) is extrapolated, the
/// theta line Q = theta x + (1 - theta)(a + b t) is forecast by simple
/// exponential smoothing, and the two are combined with weights
/// (1 - 1/theta, 1/theta). theta = 2 gives the equal-weight combination.
struct ThetaConfig {
    double theta = 2.0;
    std::optional<double> alpha;  // fixed SES parameter; grid search when empty
};

struct ThetaFit {
    double a = 0.0;  // intercept of the OLS line on t = 0..n-1 (relative to origin)
    double b = 0.0;  // slope per sample
    double theta = 2.0;
    double ses_alpha = 0.0;
    double ses_level = 0.0;  // last smoothed level of the theta line (relative to origin)
    double origin = 0.0;     // first observation, subtracted before fitting
    std::size_t n = 0;
};

struct LagRegressionConfig {
    std::vector<int> lags{1};
    bool use_covariates = false;
    std::vector<int> covariate_lags{1};
};

struct NaiveConfig {};
struct DriftConfig {};

using ModelSpec = std::variant<ThetaConfig, LagRegressionConfig, NaiveConfig, DriftConfig>;

struct Forecast {
    std::size_t horizon = 0;
    std::vector<double> values;
    std::string model;
    std::string config;
};

/// Covariate columns aligned sample-by-sample with the target series.
using CovariateMatrix = std::vector<std::vector<double>>;

inline constexpr std::size_t kMinThetaSamples = 10;

/// SES smoothing parameters tried by the theta grid search: 0.01 .. 0.99.
[[nodiscard]] std::vector<double> ses_alpha_grid();

/// In-sample one-step squared error of SES started at the first observation.
[[nodiscard]] double ses_sse(std::span<const double> values, double alpha);

[[nodiscard]] ThetaFit fit_theta(std::span<const double> values, const ThetaConfig& cfg = {});
[[nodiscard]] Forecast theta_forecast(std::span<const double> values, std::size_t horizon,
                                      const ThetaConfig& cfg = {});

/// OLS on lagged targets (plus lagged covariates when enabled) with an
/// intercept; multi-step forecasts feed predictions back as lags and hold
/// covariates at their last observed value. Throws NumericalError
/// ("degenerate features") for a rank-deficient design.
[[nodiscard]] Forecast lag_regression_forecast(std::span<const double> values, const LagRegressionConfig& cfg,
                                               const CovariateMatrix& covariates, std::size_t horizon);

[[nodiscard]] Forecast naive_forecast(std::span<const double> values, std::size_t horizon);
[[nodiscard]] Forecast drift_forecast(std::span<const double> values, std::size_t horizon);

[[nodiscard]] Forecast run_model(const ModelSpec& model, std::span<const double> values,
                                 const CovariateMatrix& covariates, std::size_t horizon);

[[nodiscard]] std::string model_name(const ModelSpec& model);
[[nodiscard]] std::string describe(const ModelSpec& model);
[[nodiscard]] bool uses_covariates(const ModelSpec& model);

enum class ModelFamily { theta, lag_regression };

struct SearchTrial {
    ModelSpec config;
    double mape = 0.0;  // +inf when the trial failed to fit
};

struct SearchResult {
    ModelSpec best;
    double best_mape = 0.0;
    std::vector<SearchTrial> trials;  // in sampling order
};

/// Random hyperparameter search: every trial is fit on the first 75% of the
/// series and scored by MAPE on the remaining 25%. Trial k depends only on
/// the seed and k, so a larger budget extends the same trial sequence.
[[nodiscard]] SearchResult random_search(ModelFamily family, std::span<const double> values,
                                         const CovariateMatrix& covariates, std::size_t budget,
                                         std::uint64_t seed);

}  // namespace rofleet
