#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("rofleet-cli-" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = rofleet::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const json& cfg) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << cfg.dump();
    return p;
}

json read(const fs::path& p) {
    std::ifstream f(p);
    return json::parse(f);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

// Ten devices with an injected anomaly, short enough to keep the test quick.
json small_config() {
    return {{"seed", 3},
            {"simulate",
             {{"devices", 10}, {"ros_per_device", 8}, {"span_days", 120},
              {"profile", {{"horizon_days", 120}}},
              {"anomalies", {{{"device_id", "dev004"}, {"extra_shift", -0.01}}}}}},
            {"map", {{"resolution", 21}}},
            {"backtest", {{"horizon_days", 20}, {"initial_train_days", 20}, {"evaluation_days", 30}, {"step", 24}}}};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults print as JSON and help lists subcommands") {
    const auto d = invoke({"defaults"});
    CHECK(d.code == 0);
    const auto cfg = json::parse(d.out);
    CHECK(cfg == rofleet::cli::default_config());
    CHECK(cfg["trend"]["half_life_days"] == 30);
    const auto h = invoke({"--help"});
    CHECK(h.code == 0);
    CHECK(h.out.find("backtest") != std::string::npos);
    CHECK(h.out.find("\"half_life_days\"") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    CHECK(invoke({}).code == rofleet::cli::kUsage);
    CHECK(invoke({"frobnicate"}).code == rofleet::cli::kUsage);
    TempDir dir("usage");
    CHECK(invoke({"simulate", "--out", dir.path.string()}).code == rofleet::cli::kUsage);  // no seed
    std::ofstream(dir.path / "bad.json") << "{ not json";
    CHECK(invoke({"simulate", "--config", (dir.path / "bad.json").string(), "--out", dir.path.string()}).code ==
          rofleet::cli::kUsage);
    const auto cfg = write_config(dir.path, {{"seed", 1}, {"trend", {{"method", "spline"}}}});
    CHECK(invoke({"simulate", "--config", cfg.string(), "--out", dir.path.string(), "--jobs", "2"}).code == 0);
    CHECK(invoke({"trend", "--config", cfg.string(), "--out", dir.path.string()}).code == rofleet::cli::kUsage);
}

TEST_CASE("missing inputs and bad data exit 2") {
    TempDir dir("data");
    const auto r = invoke({"report", "--out", dir.path.string()});
    CHECK(r.code == rofleet::cli::kDataValidation);
    const auto t = invoke({"trendtest", "--out", dir.path.string()});
    CHECK(t.code == rofleet::cli::kDataValidation);
    CHECK(t.err.find("run `trend` first") != std::string::npos);
    std::ofstream(dir.path / "m.csv") << "device_id,ro_id,x,y,timestamp,frequency_hz\n"
                                         "dev000,ro000,0,0,2023-01-01T00:00:00Z,-1\n";
    const auto bad = invoke({"trend", "--input", (dir.path / "m.csv").string(), "--out", dir.path.string()});
    CHECK(bad.code == rofleet::cli::kDataValidation);
    CHECK(bad.err.find("m.csv:2:") != std::string::npos);
}

TEST_CASE("full pipeline reports the configured drift and flags the anomaly") {
    TempDir dir("pipeline");
    const auto cfg = write_config(dir.path, small_config());
    for (const char* step : {"simulate", "trend", "shift", "outliers", "map", "trendtest", "forecast", "backtest", "report"}) {
        const auto r = invoke({step, "--config", cfg.string(), "--out", dir.path.string()});
        INFO(step, ": ", r.err);
        REQUIRE(r.code == 0);
    }
    for (const char* f : {"measurements.csv", "covariates.csv", "trend.csv", "shifts.csv", "outliers.csv", "map.csv",
                          "trendtest.csv", "forecast.csv", "backtest.csv", "report.json"})
        CHECK(fs::exists(dir.path / f));

    const auto report = read(dir.path / "report.json");
    CHECK(report["ground_truth"]["configured_total_shift"] == -6.4e-4);
    const double realized = report["ground_truth"]["median_realized_total_shift"];
    CHECK(std::abs(realized / -6.4e-4 - 1.0) < 0.25);  // median of 80 log-normal draws
    CHECK(report["median_shift"]["value"].get<double>() < 0.0);
    CHECK(report["median_shift"]["negative_share"].get<double>() > 0.9);
    CHECK(report["outliers"]["flagged"] == json::array({"dev004"}));
    CHECK(report["trend_test"]["discarded_fraction"].get<double>() < 0.05);
    CHECK(report.contains("generated_at"));

    const auto outliers = read(dir.path / "outliers.json");
    CHECK(outliers["share_curve"].size() == rofleet::cli::default_config()["outliers"]["share_thresholds"].size());
}

TEST_CASE("subcommands are idempotent over their output directory") {
    TempDir dir("idempotent");
    const auto cfg = write_config(dir.path, small_config());
    const std::vector<std::string> base{"--config", cfg.string(), "--out", dir.path.string()};
    auto with = [&](const char* step) {
        std::vector<std::string> a{step};
        a.insert(a.end(), base.begin(), base.end());
        return a;
    };
    REQUIRE(invoke(with("simulate")).code == 0);
    REQUIRE(invoke(with("trend")).code == 0);
    REQUIRE(invoke(with("shift")).code == 0);
    const auto first = slurp(dir.path / "shifts.csv");
    REQUIRE(invoke(with("shift")).code == 0);
    CHECK(slurp(dir.path / "shifts.csv") == first);
}

TEST_CASE("shutdown campaign uses epoch shifts") {
    TempDir dir("shutdown");
    const auto cfg = write_config(dir.path, {{"seed", 9}, {"campaign", "shutdown"},
                                             {"simulate", {{"devices", 4}, {"ros_per_device", 100}, {"repeats", 10}}}});
    const std::vector<std::string> base{"--config", cfg.string(), "--out", dir.path.string()};
    for (const char* step : {"simulate", "shift", "outliers", "map", "report"}) {
        std::vector<std::string> a{step};
        a.insert(a.end(), base.begin(), base.end());
        const auto r = invoke(a);
        INFO(step, ": ", r.err);
        REQUIRE(r.code == 0);
    }
    CHECK_FALSE(fs::exists(dir.path / "covariates.csv"));
    const auto shift = read(dir.path / "shift.json");
    CHECK(shift["method"] == "epoch");
    CHECK(shift["count"] == 400);
    CHECK(read(dir.path / "report.json")["missing_steps"].size() == 2);
}

TEST_CASE("output directory defaults to the environment variable") {
    TempDir dir("env");
    ::setenv(rofleet::cli::kOutputDirEnv, dir.path.string().c_str(), 1);
    const auto r = invoke({"simulate", "--seed", "2"});
    ::unsetenv(rofleet::cli::kOutputDirEnv);
    CHECK(r.code == 0);
    CHECK(fs::exists(dir.path / "measurements.csv"));
}

}
