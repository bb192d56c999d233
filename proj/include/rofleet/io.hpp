#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rofleet/backtest.hpp"
#include "rofleet/core.hpp"
#include "rofleet/spatial.hpp"
#include "rofleet/trend.hpp"

namespace rofleet::io {

inline constexpr std::string_view kMeasurementHeader = "device_id,ro_id,x,y,timestamp,frequency_hz";
inline constexpr std::string_view kCovariateHeader = "device_id,name,timestamp,value";
inline constexpr std::string_view kShiftHeader = "device_id,ro_id,x,y,f0_median,f1_median,delta";
inline constexpr std::string_view kCustomCovariatePrefix = "custom:";

/// "YYYY-MM-DDTHH:MM:SSZ" (a "+00:00" suffix is accepted on input).
[[nodiscard]] std::string format_iso8601(TimePoint t);
[[nodiscard]] TimePoint parse_iso8601(std::string_view text);

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_double(double v);

struct IngestResult {
    FleetDataset dataset;
    std::vector<std::string> warnings;
};

/// Reads the long-format measurement table. Errors (DataError) name the
/// source and line: malformed rows, non-positive frequencies, timestamps that
/// do not increase within a series, inconsistent RO locations.
[[nodiscard]] FleetDataset read_measurements(std::istream& in, Campaign campaign,
                                             const std::string& source = "<measurements>");

/// Reads covariates. Names outside the known vocabulary are kept under the
/// "custom:" namespace and reported as warnings.
[[nodiscard]] std::vector<CovariateSeries> read_covariates(std::istream& in, std::vector<std::string>& warnings,
                                                           const std::string& source = "<covariates>");

/// Loads and validates a dataset from disk; validation failures throw DataError.
[[nodiscard]] IngestResult ingest(const std::filesystem::path& measurements,
                                  const std::optional<std::filesystem::path>& covariates, Campaign campaign);

void write_measurements(std::ostream& out, const FleetDataset& dataset);
void write_covariates(std::ostream& out, const std::vector<CovariateSeries>& covariates);

void write_shifts(std::ostream& out, const std::vector<ShiftRecord>& shifts);
[[nodiscard]] std::vector<ShiftRecord> read_shifts(std::istream& in, const std::string& source = "<shifts>");

/// "x,y,value" rows of the map lattice, x varying fastest.
void write_map(std::ostream& out, const DegradationMap& map);

/// "device_id,ro_id,roll_time,actual,predicted" rows.
void write_historical_forecasts(std::ostream& out, const std::vector<BacktestMetrics>& runs);

}  // namespace rofleet::io
