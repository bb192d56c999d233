#include "rofleet/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "rofleet/metrics.hpp"

namespace rofleet {

namespace {

void check_finite(const Forecast& f) {
    for (double v : f.values)
        if (!std::isfinite(v)) throw NumericalError(f.model + " produced a non-finite forecast");
}

std::string join(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

}  // namespace

std::vector<double> ses_alpha_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
    return grid;
}

double ses_sse(std::span<const double> values, double alpha) {
    if (values.empty()) throw DataError("SES of an empty series");
    double level = values.front();
    double sse = 0.0;
    for (std::size_t t = 1; t < values.size(); ++t) {
        const double err = values[t] - level;
        sse += err * err;
        level += alpha * err;
    }
    return sse;
}

ThetaFit fit_theta(std::span<const double> values, const ThetaConfig& cfg) {
    const std::size_t n = values.size();
    if (n < kMinThetaSamples) throw DataError("theta method needs at least 10 samples");
    if (!(cfg.theta >= 1.0)) throw ConfigError("theta must be at least 1");
    if (cfg.alpha && !(*cfg.alpha >= 0.01 && *cfg.alpha <= 0.99))
        throw ConfigError("theta SES alpha must lie in [0.01, 0.99]");

    ThetaFit fit;
    fit.n = n;
    fit.theta = cfg.theta;
    fit.origin = values.front();

    const double tm = static_cast<double>(n - 1) / 2.0;
    double ym = 0.0;
    for (double v : values) ym += v - fit.origin;
    ym /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double dt = static_cast<double>(t) - tm;
        sxx += dt * dt;
        sxy += dt * ((values[t] - fit.origin) - ym);
    }
    fit.b = sxy / sxx;
    fit.a = ym - fit.b * tm;

    std::vector<double> line_q(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double trend = fit.a + fit.b * static_cast<double>(t);
        line_q[t] = cfg.theta * (values[t] - fit.origin) + (1.0 - cfg.theta) * trend;
    }

    if (cfg.alpha) {
        fit.ses_alpha = *cfg.alpha;
    } else {
        double best = std::numeric_limits<double>::infinity();
        for (double alpha : ses_alpha_grid()) {
            const double sse = ses_sse(line_q, alpha);
            if (sse < best) {
                best = sse;
                fit.ses_alpha = alpha;
            }
        }
    }

    double level = line_q.front();
    for (std::size_t t = 1; t < n; ++t) level += fit.ses_alpha * (line_q[t] - level);
    fit.ses_level = level;
    return fit;
}

Forecast theta_forecast(std::span<const double> values, std::size_t horizon, const ThetaConfig& cfg) {
    const ThetaFit fit = fit_theta(values, cfg);
    Forecast f{horizon, {}, "theta", describe(ModelSpec{cfg})};
    f.values.reserve(horizon);
    const double line_weight = 1.0 - 1.0 / fit.theta;
    for (std::size_t h = 1; h <= horizon; ++h) {
        const double line = fit.a + fit.b * static_cast<double>(fit.n - 1 + h);
        f.values.push_back(fit.origin + line_weight * line + (1.0 / fit.theta) * fit.ses_level);
    }
    check_finite(f);
    return f;
}

Forecast lag_regression_forecast(std::span<const double> values, const LagRegressionConfig& cfg,
                                 const CovariateMatrix& covariates, std::size_t horizon) {
    if (cfg.lags.empty() || !std::is_sorted(cfg.lags.begin(), cfg.lags.end()) ||
        std::adjacent_find(cfg.lags.begin(), cfg.lags.end()) != cfg.lags.end() || cfg.lags.front() < 1)
        throw ConfigError("lags must be non-empty, sorted, distinct and positive");
    const bool with_cov = cfg.use_covariates && !covariates.empty();
    if (cfg.use_covariates && covariates.empty()) throw DataError("lag regression configured with covariates, none given");
    if (with_cov && (cfg.covariate_lags.empty() ||
                     *std::min_element(cfg.covariate_lags.begin(), cfg.covariate_lags.end()) < 1))
        throw ConfigError("covariate lags must be non-empty and positive");

    const std::size_t n = values.size();
    const auto max_lag = static_cast<std::size_t>(cfg.lags.back());
    if (n <= max_lag + 2) throw DataError("series too short for the configured lags");
    for (const auto& col : covariates)
        if (with_cov && col.size() != n) throw DataError("covariate columns must align with the series");

    Forecast f{horizon, {}, "lag_regression", describe(ModelSpec{cfg})};
    const double origin = values.front();
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == origin; })) {
        f.values.assign(horizon, origin);
        return f;
    }

    std::size_t first_row = max_lag;
    if (with_cov)
        first_row = std::max(first_row, static_cast<std::size_t>(
                                            *std::max_element(cfg.covariate_lags.begin(), cfg.covariate_lags.end())));
    if (n <= first_row + 2) throw DataError("series too short for the configured covariate lags");

    // Standardised covariates; the scaling does not change OLS predictions.
    CovariateMatrix cov;
    if (with_cov) {
        for (const auto& col : covariates) {
            double mean = 0.0;
            for (double v : col) mean += v;
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (double v : col) var += (v - mean) * (v - mean);
            const double sd = std::sqrt(var / static_cast<double>(n));
            std::vector<double> z(n);
            for (std::size_t i = 0; i < n; ++i) z[i] = sd > 0.0 ? (col[i] - mean) / sd : 0.0;
            cov.push_back(std::move(z));
        }
    }

    const std::size_t n_features =
        1 + cfg.lags.size() + (with_cov ? cov.size() * cfg.covariate_lags.size() : 0);
    const std::size_t rows = n - first_row;
    Eigen::MatrixXd design(rows, n_features);
    Eigen::VectorXd target(rows);

    std::vector<double> history(values.begin(), values.end());
    for (double& v : history) v -= origin;

    auto fill_row = [&](auto&& row, std::size_t t) {
        std::size_t c = 0;
        row(c++) = 1.0;
        for (int lag : cfg.lags) row(c++) = history[t - static_cast<std::size_t>(lag)];
        if (with_cov)
            for (const auto& col : cov)
                for (int lag : cfg.covariate_lags) {
                    const std::size_t src = std::min(t - static_cast<std::size_t>(lag), n - 1);
                    row(c++) = col[src];
                }
    };

    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first_row + r;
        fill_row(design.row(static_cast<Eigen::Index>(r)), t);
        target(static_cast<Eigen::Index>(r)) = history[t];
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(n_features)) throw NumericalError("degenerate features");
    const Eigen::VectorXd coef = qr.solve(target);

    Eigen::RowVectorXd row(n_features);
    f.values.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t t = n + h;
        fill_row(row, t);
        const double next = row.dot(coef);
        history.push_back(next);
        f.values.push_back(origin + next);
    }
    check_finite(f);
    return f;
}

Forecast naive_forecast(std::span<const double> values, std::size_t horizon) {
    if (values.size() < 2) throw DataError("baseline forecasts need at least 2 samples");
    return {horizon, std::vector<double>(horizon, values.back()), "naive", "naive"};
}

Forecast drift_forecast(std::span<const double> values, std::size_t horizon) {
    if (values.size() < 2) throw DataError("baseline forecasts need at least 2 samples");
    const double slope = (values.back() - values.front()) / static_cast<double>(values.size() - 1);
    Forecast f{horizon, {}, "drift", "drift"};
    for (std::size_t h = 1; h <= horizon; ++h) f.values.push_back(values.back() + slope * static_cast<double>(h));
    return f;
}

Forecast run_model(const ModelSpec& model, std::span<const double> values, const CovariateMatrix& covariates,
                   std::size_t horizon) {
    return std::visit(
        [&](const auto& cfg) -> Forecast {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, ThetaConfig>)
                return theta_forecast(values, horizon, cfg);
            else if constexpr (std::is_same_v<T, LagRegressionConfig>)
                return lag_regression_forecast(values, cfg, covariates, horizon);
            else if constexpr (std::is_same_v<T, NaiveConfig>)
                return naive_forecast(values, horizon);
            else
                return drift_forecast(values, horizon);
        },
        model);
}

std::string model_name(const ModelSpec& model) {
    constexpr const char* names[] = {"theta", "lag_regression", "naive", "drift"};
    return names[model.index()];
}

std::string describe(const ModelSpec& model) {
    std::ostringstream os;
    os.precision(17);
    if (const auto* t = std::get_if<ThetaConfig>(&model)) {
        os << "theta(theta=" << t->theta << ",alpha=";
        if (t->alpha)
            os << *t->alpha;
        else
            os << "auto";
        os << ")";
    } else if (const auto* l = std::get_if<LagRegressionConfig>(&model)) {
        os << "lag_regression(lags=[" << join(l->lags) << "]";
        if (l->use_covariates) os << ",covariate_lags=[" << join(l->covariate_lags) << "]";
        os << ")";
    } else {
        os << model_name(model);
    }
    return os.str();
}

bool uses_covariates(const ModelSpec& model) {
    const auto* l = std::get_if<LagRegressionConfig>(&model);
    return l != nullptr && l->use_covariates;
}

namespace {

ModelSpec sample_config(ModelFamily family, std::mt19937_64& rng, bool covariates_available) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (family == ModelFamily::theta) {
        ThetaConfig cfg;
        cfg.theta = 1.0 + 2.0 * unit(rng);
        if (unit(rng) < 0.5) cfg.alpha = std::round((0.01 + 0.98 * unit(rng)) * 100.0) / 100.0;
        return cfg;
    }
    static constexpr int candidate_lags[] = {1, 2, 3, 4, 6, 12, 24, 48};
    LagRegressionConfig cfg;
    cfg.lags.clear();
    const std::size_t count = 1 + static_cast<std::size_t>(unit(rng) * 3.0);
    for (int lag : candidate_lags)
        if (unit(rng) < static_cast<double>(count) / std::size(candidate_lags)) cfg.lags.push_back(lag);
    if (cfg.lags.empty()) cfg.lags.push_back(1);
    if (covariates_available) {
        cfg.use_covariates = unit(rng) < 0.5;
        static constexpr int candidate_cov_lags[] = {1, 2, 12};
        cfg.covariate_lags = {candidate_cov_lags[static_cast<std::size_t>(unit(rng) * 3.0) % 3]};
    }
    return cfg;
}

}  // namespace

SearchResult random_search(ModelFamily family, std::span<const double> values, const CovariateMatrix& covariates,
                           std::size_t budget, std::uint64_t seed) {
    if (budget == 0) throw ConfigError("search budget must be at least 1");
    const std::size_t train = values.size() * 3 / 4;
    const std::size_t valid = values.size() - train;
    if (train < kMinThetaSamples || valid == 0) throw DataError("series too short for a 75/25 search split");

    const auto train_values = values.first(train);
    const auto valid_values = values.subspan(train);
    CovariateMatrix train_cov;
    for (const auto& col : covariates) {
        if (col.size() != values.size()) throw DataError("covariate columns must align with the series");
        train_cov.emplace_back(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(train));
    }

    std::mt19937_64 rng(seed);
    SearchResult result;
    result.best_mape = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < budget; ++k) {
        SearchTrial trial{sample_config(family, rng, !covariates.empty()), std::numeric_limits<double>::infinity()};
        try {
            const Forecast f = run_model(trial.config, train_values, train_cov, valid);
            trial.mape = mape(valid_values, f.values);
        } catch (const NumericalError&) {
            // unusable configuration, keeps +inf
        } catch (const DataError&) {
        }
        if (k == 0 || trial.mape < result.best_mape) {
            result.best = trial.config;
            result.best_mape = trial.mape;
        }
        result.trials.push_back(std::move(trial));
    }
    return result;
}

}  // namespace rofleet
