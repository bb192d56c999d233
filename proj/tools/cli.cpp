#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "rofleet/backtest.hpp"
#include "rofleet/core.hpp"
#include "rofleet/forecast.hpp"
#include "rofleet/io.hpp"
#include "rofleet/sim.hpp"
#include "rofleet/spatial.hpp"
#include "rofleet/stats.hpp"
#include "rofleet/trend.hpp"

namespace rofleet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json model_defaults() {
    return {{"type", "theta"}, {"theta", 2.0},        {"alpha", nullptr},
            {"lags", {1}},     {"use_covariates", false}, {"covariate_lags", {1}}};
}

}  // namespace

json default_config() {
    json profile = {{"total_shift", -6.4e-4}, {"horizon_days", 280},   {"exponent", 0.2},
                    {"noise_sigma", 1e-4},    {"shift_spread", 0.5},   {"noise_ar1", 0.0},
                    {"hotspot", nullptr}};
    json backtest_model = model_defaults();
    return {
        {"seed", nullptr},
        {"campaign", "continuous"},
        {"simulate",
         {{"devices", 10},
          {"ros_per_device", 8},
          {"cadence_hours", 2},
          {"span_days", 280},
          {"start", "2023-01-01T00:00:00Z"},
          {"repeats", 100},
          {"covariates", true},
          {"physical", {{"n_stages", 7}, {"t_p0", 1.0 / (2.0 * 7.0 * 200e6)}}},
          {"fabric", {{"columns", 200}, {"rows", 200}}},
          {"profile", profile},
          {"anomalies", json::array()}}},
        {"trend",
         {{"method", "ewma"}, {"half_life_days", 30}, {"adjusted", true}, {"loess_span", 0.3}, {"resample", false}}},
        {"shift", {{"window_days", 30}, {"epoch_gap_hours", 24}}},
        {"outliers", {{"threshold", 3.5}, {"share_thresholds", {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 7.5, 10.0}}}},
        {"map", {{"resolution", 101}}},
        {"trendtest", {{"alpha", 0.01}}},
        {"forecast", {{"model", model_defaults()}, {"horizon_days", 60}, {"series", nullptr}, {"search_budget", 0}}},
        {"backtest",
         {{"model", backtest_model},
          {"train_days", nullptr},
          {"initial_train_days", 40},
          {"horizon_days", 60},
          {"step", 12},
          {"evaluation_days", 100},
          {"compare", json::array()}}},
    };
}

namespace {

struct Context {
    json cfg;
    fs::path out_dir;
    std::optional<fs::path> input;
    std::optional<fs::path> covariates;
    Execution exec = Execution::parallel;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;

    [[nodiscard]] fs::path path(const std::string& name) const { return out_dir / name; }
};

// ---------------------------------------------------------------- helpers

template <typename T>
T get(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing config key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

// Merge patches delete keys set to null, so a missing key also means unset.
bool unset(const json& j, const char* key) { return !j.contains(key) || j.at(key).is_null(); }

Duration days(double d) { return Duration{static_cast<Duration::rep>(std::llround(d * 86400.0))}; }
Duration hours(double h) { return Duration{static_cast<Duration::rep>(std::llround(h * 3600.0))}; }

std::uint64_t require_seed(const Context& ctx, const char* step) {
    if (unset(ctx.cfg, "seed"))
        throw ConfigError(std::string(step) + " is stochastic: set \"seed\" in the config or pass --seed");
    return get<std::uint64_t>(ctx.cfg, "seed");
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream f(p);
    if (!f) throw DataError("cannot write " + p.string());
    f << j.dump(2) << '\n';
}

json read_json(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw DataError("cannot read " + p.string());
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw DataError(p.string() + ": " + e.what());
    }
}

template <typename Writer>
void write_file(const fs::path& p, Writer&& writer) {
    std::ofstream f(p);
    if (!f) throw DataError("cannot write " + p.string());
    writer(f);
}

fs::path require_artifact(const Context& ctx, const std::string& name, const std::string& step) {
    const fs::path p = ctx.path(name);
    if (!fs::exists(p)) throw DataError("missing " + p.string() + ": run `" + step + "` first");
    return p;
}

json distribution_json(std::span<const double> values) {
    if (values.empty()) return nullptr;
    const Distribution d = describe(values);
    return {{"count", d.count}, {"min", d.min},   {"q1", d.q1},     {"median", d.median},
            {"q3", d.q3},       {"max", d.max},   {"mean", d.mean}, {"skewness", d.skewness}};
}

Campaign campaign_of(const Context& ctx) {
    const fs::path sim = ctx.path("simulate.json");
    if (!ctx.input && fs::exists(sim)) return campaign_from_string(read_json(sim).at("campaign").get<std::string>());
    return campaign_from_string(get<std::string>(ctx.cfg, "campaign"));
}

std::optional<fs::path> covariate_path(const Context& ctx) {
    if (ctx.covariates) return ctx.covariates;
    const fs::path p = ctx.path("covariates.csv");
    if (fs::exists(p)) return p;
    return std::nullopt;
}

io::IngestResult load_measurements(const Context& ctx) {
    fs::path p = ctx.input ? *ctx.input : ctx.path("measurements.csv");
    if (!fs::exists(p))
        throw DataError("missing " + p.string() + ": run `simulate` first or pass --input");
    auto result = io::ingest(p, covariate_path(ctx), campaign_of(ctx));
    for (const auto& w : result.warnings) *ctx.err << "warning: " << w << '\n';
    return result;
}

FleetDataset load_trend(const Context& ctx) {
    const fs::path p = require_artifact(ctx, "trend.csv", "trend");
    auto result = io::ingest(p, covariate_path(ctx), Campaign::continuous);
    for (const auto& w : result.warnings) *ctx.err << "warning: " << w << '\n';
    return std::move(result.dataset);
}

std::vector<ShiftRecord> load_shifts(const Context& ctx) {
    const fs::path p = require_artifact(ctx, "shifts.csv", "shift");
    std::ifstream f(p);
    return io::read_shifts(f, p.string());
}

ModelSpec parse_model(const json& j) {
    const auto type = get<std::string>(j, "type");
    if (type == "theta") {
        ThetaConfig cfg;
        cfg.theta = get<double>(j, "theta");
        if (!unset(j, "alpha")) cfg.alpha = get<double>(j, "alpha");
        return cfg;
    }
    if (type == "lag_regression") {
        LagRegressionConfig cfg;
        cfg.lags = get<std::vector<int>>(j, "lags");
        cfg.use_covariates = get<bool>(j, "use_covariates");
        cfg.covariate_lags = get<std::vector<int>>(j, "covariate_lags");
        return cfg;
    }
    if (type == "naive") return NaiveConfig{};
    if (type == "drift") return DriftConfig{};
    throw ConfigError("unknown model type '" + type + "' (theta|lag_regression|naive|drift)");
}

json model_json(const ModelSpec& m) {
    json j = model_defaults();
    j["type"] = model_name(m);
    if (const auto* t = std::get_if<ThetaConfig>(&m)) {
        j["theta"] = t->theta;
        j["alpha"] = t->alpha ? json(*t->alpha) : json(nullptr);
    } else if (const auto* l = std::get_if<LagRegressionConfig>(&m)) {
        j["lags"] = l->lags;
        j["use_covariates"] = l->use_covariates;
        j["covariate_lags"] = l->covariate_lags;
    }
    return j;
}

BacktestConfig parse_backtest(const json& j) {
    BacktestConfig cfg;
    if (!unset(j, "train_days")) cfg.train_days = get<double>(j, "train_days");
    cfg.initial_train_days = get<double>(j, "initial_train_days");
    cfg.horizon_days = get<double>(j, "horizon_days");
    cfg.step = get<std::size_t>(j, "step");
    if (!unset(j, "evaluation_days")) cfg.evaluation_days = get<double>(j, "evaluation_days");
    json model = model_defaults();
    model.merge_patch(j.at("model"));
    cfg.model = parse_model(model);
    return cfg;
}

json backtest_config_json(const BacktestConfig& c) {
    return {{"model", model_json(c.model)},
            {"train_days", c.train_days ? json(*c.train_days) : json(nullptr)},
            {"initial_train_days", c.initial_train_days},
            {"horizon_days", c.horizon_days},
            {"step", c.step},
            {"evaluation_days", c.evaluation_days ? json(*c.evaluation_days) : json(nullptr)}};
}

// ------------------------------------------------------------ subcommands

void cmd_simulate(const Context& ctx) {
    const json& s = ctx.cfg.at("simulate");
    const json& p = s.at("profile");
    SimulationSpec spec;
    spec.seed = require_seed(ctx, "simulate");
    spec.devices = get<std::size_t>(s, "devices");
    spec.ros_per_device = get<std::size_t>(s, "ros_per_device");
    spec.cadence = hours(get<double>(s, "cadence_hours"));
    spec.span = days(get<double>(s, "span_days"));
    spec.start = io::parse_iso8601(get<std::string>(s, "start"));
    spec.physical.n_stages = get<int>(s.at("physical"), "n_stages");
    spec.physical.t_p0 = get<double>(s.at("physical"), "t_p0");
    spec.fabric.columns = get<int>(s.at("fabric"), "columns");
    spec.fabric.rows = get<int>(s.at("fabric"), "rows");
    spec.profile.total_shift = get<double>(p, "total_shift");
    spec.profile.horizon = days(get<double>(p, "horizon_days"));
    spec.profile.exponent = get<double>(p, "exponent");
    spec.profile.noise_sigma = get<double>(p, "noise_sigma");
    spec.profile.shift_spread = get<double>(p, "shift_spread");
    spec.profile.noise_ar1 = get<double>(p, "noise_ar1");
    if (!unset(p, "hotspot")) {
        const json& h = p.at("hotspot");
        spec.profile.spatial_field = hotspot_field(ro_layout(spec.ros_per_device, spec.fabric),
                                                   {get<int>(h, "x"), get<int>(h, "y")}, get<double>(h, "radius"),
                                                   get<double>(h, "gain"));
    }
    for (const auto& a : s.at("anomalies"))
        spec.anomalies.push_back({get<std::string>(a, "device_id"), get<double>(a, "extra_shift")});

    const Campaign campaign = campaign_from_string(get<std::string>(ctx.cfg, "campaign"));
    FleetDataset ds = campaign == Campaign::continuous
                          ? simulate_fleet(spec, ctx.exec)
                          : simulate_shutdown(spec, get<std::size_t>(s, "repeats"), ctx.exec);
    const bool with_cov = campaign == Campaign::continuous && get<bool>(s, "covariates");
    if (with_cov) ds.covariates = simulate_covariates(ds, spec.seed);

    write_file(ctx.path("measurements.csv"), [&](std::ostream& f) { io::write_measurements(f, ds); });
    if (with_cov)
        write_file(ctx.path("covariates.csv"), [&](std::ostream& f) { io::write_covariates(f, ds.covariates); });
    else
        fs::remove(ctx.path("covariates.csv"));

    std::vector<double> realized;
    for (const auto& series : ds.series)
        realized.push_back(effective_total_shift(spec, series.device_id, series.ro_id, series.location));
    json anomalies = json::array();
    for (const auto& a : spec.anomalies) anomalies.push_back({{"device_id", a.device_id}, {"extra_shift", a.extra_shift}});
    write_json(ctx.path("simulate.json"),
               {{"campaign", to_string(campaign)},
                {"seed", spec.seed},
                {"devices", spec.devices},
                {"ros_per_device", spec.ros_per_device},
                {"series", ds.series.size()},
                {"samples_per_series", ds.series.front().size()},
                {"cadence_seconds", spec.cadence.count()},
                {"nominal_frequency_hz", nominal_frequency(spec.physical)},
                {"configured_total_shift", spec.profile.total_shift},
                {"median_realized_total_shift", median(realized)},
                {"anomalies", anomalies},
                {"hotspot", unset(p, "hotspot") ? json(nullptr) : p.at("hotspot")},
                {"covariates", with_cov}});
    *ctx.out << "simulated " << ds.series.size() << " series into " << ctx.out_dir.string() << '\n';
}

void cmd_trend(const Context& ctx) {
    const json& t = ctx.cfg.at("trend");
    FleetDataset ds = load_measurements(ctx).dataset;
    if (ds.campaign != Campaign::continuous) throw DataError("trend extraction requires a continuous campaign");
    TrendOptions opts;
    const auto method = get<std::string>(t, "method");
    if (method == "ewma")
        opts.method = TrendMethod::ewma;
    else if (method == "loess")
        opts.method = TrendMethod::loess;
    else
        throw ConfigError("unknown trend method '" + method + "' (ewma|loess)");
    opts.ewma.half_life = half_life_in_samples(days(get<double>(t, "half_life_days")), ds.sample_period);
    opts.ewma.adjusted = get<bool>(t, "adjusted");
    opts.loess.span = get<double>(t, "loess_span");
    if (get<bool>(t, "resample")) opts.resample_period = ds.sample_period;

    const FleetDataset trend = trend_fleet(ds, opts, ctx.exec);
    write_file(ctx.path("trend.csv"), [&](std::ostream& f) { io::write_measurements(f, trend); });
    write_json(ctx.path("trend.json"),
               {{"method", method},
                {"series", trend.series.size()},
                {"sample_period_seconds", trend.sample_period.count()},
                {"half_life_samples", opts.ewma.half_life},
                {"alpha", half_life_to_alpha(opts.ewma.half_life)},
                {"adjusted", opts.ewma.adjusted},
                {"loess_span", opts.loess.span},
                {"resampled", opts.resample_period > Duration::zero()}});
    *ctx.out << "extracted " << trend.series.size() << " trends (" << method << ")\n";
}

void cmd_shift(const Context& ctx) {
    const json& s = ctx.cfg.at("shift");
    std::vector<ShiftRecord> shifts;
    std::string method;
    if (campaign_of(ctx) == Campaign::shutdown) {
        shifts = fleet_epoch_shifts(load_measurements(ctx).dataset, hours(get<double>(s, "epoch_gap_hours")));
        method = "epoch";
    } else {
        shifts = fleet_window_shifts(load_trend(ctx), days(get<double>(s, "window_days")), ctx.exec);
        method = "window";
    }
    write_file(ctx.path("shifts.csv"), [&](std::ostream& f) { io::write_shifts(f, shifts); });
    std::vector<double> deltas;
    std::size_t negative = 0;
    for (const auto& r : shifts) {
        deltas.push_back(r.delta);
        negative += r.delta < 0.0 ? 1 : 0;
    }
    write_json(ctx.path("shift.json"),
               {{"method", method},
                {"window_days", s.at("window_days")},
                {"count", shifts.size()},
                {"median_shift", median(deltas)},
                {"negative_share", static_cast<double>(negative) / static_cast<double>(shifts.size())},
                {"distribution", distribution_json(deltas)}});
    *ctx.out << "median relative shift " << median(deltas) << " over " << shifts.size() << " ROs\n";
}

void cmd_outliers(const Context& ctx) {
    const json& o = ctx.cfg.at("outliers");
    const DeviceShifts grouped = group_by_device(load_shifts(ctx));
    const OutlierReport report = modified_z_scores(grouped, get<double>(o, "threshold"));
    const auto thresholds = get<std::vector<double>>(o, "share_thresholds");
    const auto curve = outlier_share_curve(grouped, thresholds);

    write_file(ctx.path("outliers.csv"), [&](std::ostream& f) {
        f << "device_id,median_shift,z,flagged\n";
        for (const auto& d : report.devices)
            f << d.device_id << ',' << io::format_double(d.median_shift) << ',' << io::format_double(d.z) << ','
              << (d.flagged ? "true" : "false") << '\n';
    });
    json flagged = json::array();
    json devices = json::array();
    for (const auto& d : report.devices) {
        if (d.flagged) flagged.push_back(d.device_id);
        devices.push_back({{"device_id", d.device_id}, {"median_shift", d.median_shift}, {"z", d.z}, {"flagged", d.flagged}});
    }
    json share = json::array();
    for (const auto& c : curve) share.push_back({{"threshold", c.threshold}, {"share", c.share}});
    write_json(ctx.path("outliers.json"), {{"fleet_median", report.fleet_median},
                                           {"mad", report.mad},
                                           {"mad_fallback", report.mad_fallback},
                                           {"threshold", report.threshold},
                                           {"flagged", flagged},
                                           {"devices", devices},
                                           {"share_curve", share}});
    *ctx.out << flagged.size() << " of " << report.devices.size() << " devices flagged\n";
}

void cmd_map(const Context& ctx) {
    const auto shifts = load_shifts(ctx);
    const auto sources = location_medians(shifts);
    const DegradationMap map = interpolate(sources, get<std::size_t>(ctx.cfg.at("map"), "resolution"), ctx.exec);
    write_file(ctx.path("map.csv"), [&](std::ostream& f) { io::write_map(f, map); });
    auto extremum_json = [](const MapExtremum& e) { return json{{"x", e.x}, {"y", e.y}, {"value", e.value}}; };
    auto worst = std::min_element(sources.begin(), sources.end(),
                                  [](const auto& a, const auto& b) { return a.second < b.second; });
    json src = json::array();
    for (const auto& [loc, v] : sources) src.push_back({{"x", loc.x}, {"y", loc.y}, {"median_shift", v}});
    write_json(ctx.path("map.json"), {{"resolution", map.resolution},
                                      {"hotspot", extremum_json(map.minimum())},
                                      {"maximum", extremum_json(map.maximum())},
                                      {"worst_source", {{"x", worst->first.x}, {"y", worst->first.y}, {"median_shift", worst->second}}},
                                      {"sources", src}});
    *ctx.out << "map hotspot at (" << map.minimum().x << ", " << map.minimum().y << ")\n";
}

void cmd_trendtest(const Context& ctx) {
    const double alpha = get<double>(ctx.cfg.at("trendtest"), "alpha");
    const FleetDataset trend = load_trend(ctx);
    const FleetTrendTest test = fleet_trend_test(trend, alpha, ctx.exec);
    const auto slopes = fleet_slopes(trend, ctx.exec);
    write_file(ctx.path("trendtest.csv"), [&](std::ostream& f) {
        f << "device_id,ro_id,tau,concordant,discordant,p_value,significant,slope_hz_per_sample,r2\n";
        for (std::size_t i = 0; i < trend.series.size(); ++i) {
            const auto& r = test.per_series[i];
            f << trend.series[i].device_id << ',' << trend.series[i].ro_id << ',' << io::format_double(r.tau) << ','
              << r.concordant << ',' << r.discordant << ',' << io::format_double(r.p_value) << ','
              << (r.significant ? "true" : "false") << ',' << io::format_double(slopes[i].slope) << ','
              << io::format_double(slopes[i].r2) << '\n';
        }
    });
    std::vector<double> slope_values;
    std::size_t negative = 0;
    for (const auto& s : slopes) {
        slope_values.push_back(s.slope);
        negative += s.slope < 0.0 ? 1 : 0;
    }
    write_json(ctx.path("trendtest.json"),
               {{"alpha", alpha},
                {"series", trend.series.size()},
                {"retained", test.retained_taus.size()},
                {"discarded_fraction", test.discarded_fraction},
                {"tau", distribution_json(test.retained_taus)},
                {"negative_slope_share", static_cast<double>(negative) / static_cast<double>(slopes.size())},
                {"slope_units", "Hz per sample"},
                {"slope", distribution_json(slope_values)}});
    *ctx.out << "retained " << test.retained_taus.size() << " of " << trend.series.size() << " series\n";
}

void cmd_forecast(const Context& ctx) {
    const json& fc = ctx.cfg.at("forecast");
    const FleetDataset trend = load_trend(ctx);
    json model_cfg = model_defaults();
    model_cfg.merge_patch(fc.at("model"));
    ModelSpec model = parse_model(model_cfg);
    const std::size_t horizon = static_cast<std::size_t>(std::llround(get<double>(fc, "horizon_days") *
                                                                      static_cast<double>(samples_per_day(trend.sample_period))));
    std::vector<const FrequencySeries*> selected;
    const bool all = unset(fc, "series");
    for (const auto& s : trend.series)
        if (all || series_key(s) == get<std::string>(fc, "series")) selected.push_back(&s);
    if (selected.empty()) throw DataError("no series matches forecast.series");

    json search = nullptr;
    const auto budget = get<std::size_t>(fc, "search_budget");
    if (budget > 0) {
        const ModelFamily family = std::holds_alternative<LagRegressionConfig>(model) ? ModelFamily::lag_regression
                                                                                        : ModelFamily::theta;
        const auto& first = *selected.front();
        const CovariateMatrix cov = family == ModelFamily::lag_regression
                                        ? align_covariates(trend.covariates, first.device_id, first.timestamps)
                                        : CovariateMatrix{};
        const SearchResult res = random_search(family, first.frequencies, cov, budget, require_seed(ctx, "search"));
        model = res.best;
        json trials = json::array();
        for (const auto& t : res.trials)
            trials.push_back({{"config", model_json(t.config)},
                              {"validation_mape", std::isfinite(t.mape) ? json(t.mape) : json(nullptr)}});
        search = {{"series", series_key(first)}, {"budget", budget}, {"best_validation_mape", res.best_mape}, {"trials", trials}};
    }

    json forecasts = json::array();
    write_file(ctx.path("forecast.csv"), [&](std::ostream& f) {
        f << "device_id,ro_id,step,timestamp,value\n";
        for (const auto* s : selected) {
            const CovariateMatrix cov =
                uses_covariates(model) ? align_covariates(trend.covariates, s->device_id, s->timestamps) : CovariateMatrix{};
            const Forecast fcst = run_model(model, s->frequencies, cov, horizon);
            for (std::size_t h = 0; h < fcst.values.size(); ++h)
                f << s->device_id << ',' << s->ro_id << ',' << h + 1 << ','
                  << io::format_iso8601(s->timestamps.back() + trend.sample_period * static_cast<Duration::rep>(h + 1)) << ','
                  << io::format_double(fcst.values[h]) << '\n';
            forecasts.push_back({{"device_id", s->device_id}, {"ro_id", s->ro_id}, {"final", fcst.values.back()}});
        }
    });
    write_json(ctx.path("forecast.json"), {{"model", model_json(model)},
                                           {"description", describe(model)},
                                           {"horizon_samples", horizon},
                                           {"search", search},
                                           {"forecasts", forecasts}});
    *ctx.out << "forecast " << selected.size() << " series with " << describe(model) << '\n';
}

void cmd_backtest(const Context& ctx) {
    const json& b = ctx.cfg.at("backtest");
    const FleetDataset trend = load_trend(ctx);
    const BacktestConfig primary = parse_backtest(b);
    const FleetBacktest fleet = fleet_backtest(trend, primary, ctx.exec);

    write_file(ctx.path("backtest.csv"), [&](std::ostream& f) { io::write_historical_forecasts(f, fleet.per_series); });

    json per_series = json::array();
    for (const auto& m : fleet.per_series)
        per_series.push_back({{"device_id", m.device_id},
                              {"ro_id", m.ro_id},
                              {"mape", m.mape},
                              {"rolls", m.historical_forecast.size()},
                              {"historical_span_days", static_cast<double>(m.historical_span.count()) / 86400.0}});

    json comparison = nullptr;
    if (!b.at("compare").empty()) {
        std::vector<BacktestConfig> configs{primary};
        for (const auto& patch : b.at("compare")) {
            json merged = b;
            merged.erase("compare");
            merged.merge_patch(patch);
            configs.push_back(parse_backtest(merged));
        }
        std::vector<FleetBacktest> runs{fleet};
        for (std::size_t c = 1; c < configs.size(); ++c) runs.push_back(fleet_backtest(trend, configs[c], ctx.exec));
        std::vector<std::vector<double>> fair(configs.size());
        double window_days = 0.0;
        for (std::size_t i = 0; i < trend.series.size(); ++i) {
            std::vector<BacktestMetrics> per_config;
            for (const auto& r : runs) per_config.push_back(r.per_series[i]);
            const ComparisonTable table = fair_compare(per_config);
            window_days = static_cast<double>(table.window.count()) / 86400.0;
            for (std::size_t c = 0; c < configs.size(); ++c) fair[c].push_back(table.rows[c].fair_mape);
        }
        comparison = {{"window_days", window_days}, {"configs", json::array()}};
        for (std::size_t c = 0; c < configs.size(); ++c)
            comparison["configs"].push_back({{"config", backtest_config_json(configs[c])},
                                             {"original_mape", distribution_json(runs[c].mapes)},
                                             {"fair_mape", distribution_json(fair[c])}});
    }

    write_json(ctx.path("backtest.json"),
               {{"config", backtest_config_json(primary)},
                {"series", fleet.per_series.size()},
                {"mape", distribution_json(fleet.mapes)},
                {"histogram", {{"lo", fleet.histogram.lo}, {"hi", fleet.histogram.hi}, {"counts", fleet.histogram.counts}}},
                {"per_series", per_series},
                {"comparison", comparison}});
    *ctx.out << "median backtest MAPE " << fleet.distribution.median << "% over " << fleet.per_series.size()
             << " series\n";
}

void cmd_report(const Context& ctx) {
    struct Section {
        const char* file;
        const char* step;
    };
    constexpr Section sections[] = {{"simulate.json", "simulate"}, {"shift.json", "shift"},
                                    {"outliers.json", "outliers"}, {"map.json", "map"},
                                    {"trendtest.json", "trendtest"}, {"backtest.json", "backtest"}};
    json loaded;
    json missing = json::array();
    for (const auto& s : sections) {
        const fs::path p = ctx.path(s.file);
        if (fs::exists(p))
            loaded[s.step] = read_json(p);
        else
            missing.push_back(s.step);
    }
    if (!loaded.contains("shift") && !loaded.contains("trendtest") && !loaded.contains("backtest") &&
        !loaded.contains("outliers"))
        throw DataError("no analysis outputs in " + ctx.out_dir.string() +
                        ": run `shift`, `outliers`, `trendtest` or `backtest` first");

    json report;
    report["generated_at"] = io::format_iso8601(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
    report["missing_steps"] = missing;
    if (loaded.contains("simulate")) {
        const json& s = loaded["simulate"];
        report["ground_truth"] = {{"configured_total_shift", s["configured_total_shift"]},
                                  {"median_realized_total_shift", s["median_realized_total_shift"]},
                                  {"anomalies", s["anomalies"]},
                                  {"hotspot", s["hotspot"]}};
    }
    if (loaded.contains("shift"))
        report["median_shift"] = {{"value", loaded["shift"]["median_shift"]},
                                  {"method", loaded["shift"]["method"]},
                                  {"negative_share", loaded["shift"]["negative_share"]}};
    if (loaded.contains("outliers"))
        report["outliers"] = {{"flagged", loaded["outliers"]["flagged"]},
                              {"fleet_median", loaded["outliers"]["fleet_median"]},
                              {"mad", loaded["outliers"]["mad"]},
                              {"threshold", loaded["outliers"]["threshold"]}};
    if (loaded.contains("map")) report["degradation_hotspot"] = loaded["map"]["hotspot"];
    if (loaded.contains("trendtest"))
        report["trend_test"] = {{"tau", loaded["trendtest"]["tau"]},
                                {"discarded_fraction", loaded["trendtest"]["discarded_fraction"]},
                                {"negative_slope_share", loaded["trendtest"]["negative_slope_share"]}};
    if (loaded.contains("backtest"))
        report["backtest"] = {{"config", loaded["backtest"]["config"]}, {"mape_percent", loaded["backtest"]["mape"]}};
    write_json(ctx.path("report.json"), report);
    *ctx.out << "report written to " << ctx.path("report.json").string() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ring-oscillator fleet ageing analysis: simulation, trends, outliers, maps, forecasts, backtests.\n"
                 "Every subcommand reads a JSON config (see `rofleet defaults` for all keys and defaults) and "
                 "writes CSV/JSON artifacts into the output directory.",
                 "rofleet"};
    app.require_subcommand(1);
    app.fallthrough();
    app.footer("Default configuration (override any subset with --config):\n" + default_config().dump(2));

    std::string config_path;
    std::string out_dir;
    std::string input;
    std::string covariates;
    std::string campaign;
    std::optional<std::uint64_t> seed;
    int jobs = 0;
    bool serial = false;
    app.add_option("-c,--config", config_path, "JSON run configuration merged over the defaults");
    app.add_option("-o,--out", out_dir,
                   std::string("Output directory (default: $") + kOutputDirEnv + " or ./rofleet-out)");
    app.add_option("-i,--input", input, "Measurement CSV (default: <out>/measurements.csv)");
    app.add_option("--covariates", covariates, "Covariate CSV (default: <out>/covariates.csv if present)");
    app.add_option("--campaign", campaign, "shutdown|continuous (default from config: continuous)");
    app.add_option("--seed", seed, "Root seed for stochastic steps (required by simulate and searches)");
    app.add_option("-j,--jobs", jobs, "Maximum worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--serial", serial, "Use the serial reference kernels");

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"simulate", "Generate a synthetic fleet (measurements.csv, covariates.csv, simulate.json)"},
        {"trend", "EWMA or LOESS trend extraction (trend.csv, trend.json)"},
        {"shift", "Relative frequency shift per RO (shifts.csv, shift.json)"},
        {"outliers", "Modified Z-scores of device median shifts (outliers.csv, outliers.json)"},
        {"map", "Interpolated degradation map of median shifts (map.csv, map.json)"},
        {"trendtest", "Kendall tau trend test and regression slopes (trendtest.csv, trendtest.json)"},
        {"forecast", "Forecast trend series (forecast.csv, forecast.json)"},
        {"backtest", "Historical backtest of a forecaster (backtest.csv, backtest.json)"},
        {"report", "Aggregate prior outputs into report.json"},
        {"defaults", "Print the default configuration"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        Context ctx;
        ctx.out = &out;
        ctx.err = &err;
        ctx.cfg = default_config();
        if (command == "defaults") {
            out << ctx.cfg.dump(2) << '\n';
            return kSuccess;
        }
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot open config " + config_path);
            try {
                ctx.cfg.merge_patch(json::parse(f));
            } catch (const json::exception& e) {
                throw ConfigError(config_path + ": " + e.what());
            }
        }
        if (seed) ctx.cfg["seed"] = *seed;
        if (!campaign.empty()) ctx.cfg["campaign"] = campaign;
        if (out_dir.empty()) {
            const char* env = std::getenv(kOutputDirEnv);
            out_dir = env != nullptr && *env != '\0' ? env : "rofleet-out";
        }
        ctx.out_dir = out_dir;
        if (!input.empty()) ctx.input = input;
        if (!covariates.empty()) ctx.covariates = covariates;
        ctx.exec = serial ? Execution::serial : Execution::parallel;
        set_max_threads(jobs);
        fs::create_directories(ctx.out_dir);

        if (command == "simulate") cmd_simulate(ctx);
        else if (command == "trend") cmd_trend(ctx);
        else if (command == "shift") cmd_shift(ctx);
        else if (command == "outliers") cmd_outliers(ctx);
        else if (command == "map") cmd_map(ctx);
        else if (command == "trendtest") cmd_trendtest(ctx);
        else if (command == "forecast") cmd_forecast(ctx);
        else if (command == "backtest") cmd_backtest(ctx);
        else if (command == "report") cmd_report(ctx);
        return kSuccess;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataValidation;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const json::exception& e) {
        err << "error: configuration: " << e.what() << '\n';
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kDataValidation;
    }
}

}  // namespace rofleet::cli
