#pragma once

#include <span>

namespace rofleet {

/// Mean absolute percentage error, (100 / V) * sum |y - yhat| / |y|.
/// Throws DataError on length mismatch, empty input or a zero actual value.
[[nodiscard]] double mape(std::span<const double> actual, std::span<const double> predicted);

}  // namespace rofleet
