#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "rofleet/core.hpp"
#include "rofleet/parallel.hpp"
#include "rofleet/trend.hpp"

namespace rofleet {

/// Largest fabric coordinate accepted by the triangulation. Keeps the exact
/// predicates inside 256-bit integer range.
inline constexpr int kMaxFabricCoordinate = 65535;

/// Delaunay triangulation of integer fabric locations (Bowyer-Watson with
/// exact predicates). Points are inserted in lexicographic (x, y) order, so
/// the result does not depend on the order they are supplied in.
class Triangulation {
public:
    using Triangle = std::array<std::size_t, 3>;  // counter-clockwise indices into points()

    /// Throws DataError for fewer than 3 distinct or for collinear points.
    explicit Triangulation(std::vector<GridLocation> points);

    [[nodiscard]] const std::vector<GridLocation>& points() const noexcept { return points_; }
    [[nodiscard]] const std::vector<Triangle>& triangles() const noexcept { return triangles_; }

    struct Hit {
        std::size_t triangle;
        std::array<double, 3> weights;  // barycentric, non-negative, sum to 1
    };

    /// Triangle containing (x, y), or nullopt outside the convex hull.
    [[nodiscard]] std::optional<Hit> locate(double x, double y) const;

private:
    std::vector<GridLocation> points_;
    std::vector<Triangle> triangles_;
};

/// Piecewise-linear interpolant over the triangulated sources; nearest
/// source value outside their convex hull.
class LinearInterpolator {
public:
    explicit LinearInterpolator(const std::map<GridLocation, double>& sources);

    [[nodiscard]] double operator()(double x, double y) const;
    [[nodiscard]] const Triangulation& triangulation() const noexcept { return mesh_; }

private:
    std::map<GridLocation, double> sources_;
    Triangulation mesh_;
    std::vector<double> values_;  // aligned with mesh_.points()
};

struct MapExtremum {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
};

/// Interpolated degradation over a regular lattice spanning the sources'
/// bounding box, row-major with x varying fastest.
struct DegradationMap {
    std::size_t resolution = 0;  // lattice points per axis
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    std::vector<double> values;
    std::map<GridLocation, double> sources;

    [[nodiscard]] double x_at(std::size_t i) const noexcept { return x0 + static_cast<double>(i) * dx; }
    [[nodiscard]] double y_at(std::size_t j) const noexcept { return y0 + static_cast<double>(j) * dy; }
    [[nodiscard]] double value(std::size_t i, std::size_t j) const { return values[j * resolution + i]; }

    [[nodiscard]] MapExtremum minimum() const;  // most degraded point
    [[nodiscard]] MapExtremum maximum() const;
};

/// Median shift across all devices at each RO location.
[[nodiscard]] std::map<GridLocation, double> location_medians(const std::vector<ShiftRecord>& records);

/// Evaluates the interpolant of `sources` on a resolution x resolution lattice.
[[nodiscard]] DegradationMap interpolate(const std::map<GridLocation, double>& sources, std::size_t resolution,
                                         Execution exec = Execution::parallel);

}  // namespace rofleet
