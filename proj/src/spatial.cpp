#include "rofleet/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace rofleet {

namespace {

using boost::multiprecision::int256_t;
__extension__ typedef __int128 int128_t;

struct Point {
    std::int64_t x;
    std::int64_t y;
};

// > 0 when a, b, c turn counter-clockwise.
int orientation(Point a, Point b, Point c) {
    const int128_t det = static_cast<int128_t>(b.x - a.x) * (c.y - a.y) - static_cast<int128_t>(b.y - a.y) * (c.x - a.x);
    return (det > 0) - (det < 0);
}

// True when d lies strictly inside the circumcircle of the CCW triangle a, b, c.
bool in_circle(Point a, Point b, Point c, Point d) {
    const int256_t adx = a.x - d.x, ady = a.y - d.y;
    const int256_t bdx = b.x - d.x, bdy = b.y - d.y;
    const int256_t cdx = c.x - d.x, cdy = c.y - d.y;
    const int256_t alift = adx * adx + ady * ady;
    const int256_t blift = bdx * bdx + bdy * bdy;
    const int256_t clift = cdx * cdx + cdy * cdy;
    const int256_t det = alift * (bdx * cdy - cdx * bdy) - blift * (adx * cdy - cdx * ady) + clift * (adx * bdy - bdx * ady);
    return det > 0;
}

int128_t twice_area(Point a, Point b, Point c) {
    return static_cast<int128_t>(b.x - a.x) * (c.y - a.y) - static_cast<int128_t>(b.y - a.y) * (c.x - a.x);
}

// Twice the area of the convex hull (Andrew's monotone chain); pts sorted.
int128_t twice_hull_area(const std::vector<Point>& pts) {
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && orientation(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && orientation(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    int128_t area = 0;
    for (std::size_t i = 1; i + 1 < hull.size(); ++i) area += twice_area(hull[0], hull[i], hull[i + 1]);
    return area;
}

}  // namespace

Triangulation::Triangulation(std::vector<GridLocation> points) : points_(std::move(points)) {
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
    const std::size_t n = points_.size();
    if (n < 3) throw DataError("triangulation needs at least 3 distinct locations");
    for (const auto& p : points_)
        if (p.x < 0 || p.y < 0 || p.x > kMaxFabricCoordinate || p.y > kMaxFabricCoordinate)
            throw DataError("fabric location outside [0, " + std::to_string(kMaxFabricCoordinate) + "]");

    std::vector<Point> pts;
    pts.reserve(n + 3);
    for (const auto& p : points_) pts.push_back({p.x, p.y});
    const bool collinear = std::all_of(pts.begin() + 2, pts.end(),
                                       [&](const Point& c) { return orientation(pts[0], pts[1], c) == 0; });
    if (collinear) throw DataError("triangulation needs non-collinear locations");

    // Super-triangle far enough away that every hull edge of the input has an
    // empty circumcircle that excludes the super vertices: ~ extent^3.
    std::int64_t min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
    for (const auto& p : pts) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const std::int64_t extent = std::max<std::int64_t>({max_x - min_x, max_y - min_y, 1});
    const std::int64_t far = 16 * extent * extent * extent + 16;
    const std::int64_t cx = (min_x + max_x) / 2;
    const std::int64_t cy = (min_y + max_y) / 2;
    pts.push_back({cx - 2 * far, cy - far});
    pts.push_back({cx + 2 * far, cy - far});
    pts.push_back({cx, cy + 2 * far});

    std::vector<Triangle> tris{{n, n + 1, n + 2}};
    std::vector<Triangle> next;
    std::map<std::pair<std::size_t, std::size_t>, int> edge_count;
    std::vector<std::pair<std::size_t, std::size_t>> cavity;
    for (std::size_t p = 0; p < n; ++p) {
        next.clear();
        cavity.clear();
        edge_count.clear();
        for (const auto& t : tris) {
            if (in_circle(pts[t[0]], pts[t[1]], pts[t[2]], pts[p])) {
                for (int e = 0; e < 3; ++e) {
                    const std::size_t a = t[e];
                    const std::size_t b = t[(e + 1) % 3];
                    cavity.emplace_back(a, b);
                    ++edge_count[{std::min(a, b), std::max(a, b)}];
                }
            } else {
                next.push_back(t);
            }
        }
        for (const auto& [a, b] : cavity)
            if (edge_count[{std::min(a, b), std::max(a, b)}] == 1) next.push_back({a, b, p});
        tris.swap(next);
    }

    int128_t covered = 0;
    for (const auto& t : tris) {
        if (t[0] >= n || t[1] >= n || t[2] >= n) continue;
        triangles_.push_back(t);
        covered += twice_area(pts[t[0]], pts[t[1]], pts[t[2]]);
    }
    pts.resize(n);
    if (covered != twice_hull_area(pts)) throw NumericalError("triangulation does not cover the convex hull");
}

std::optional<Triangulation::Hit> Triangulation::locate(double x, double y) const {
    constexpr double eps = 1e-12;
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
        const auto& t = triangles_[i];
        const double ax = points_[t[0]].x, ay = points_[t[0]].y;
        const double bx = points_[t[1]].x, by = points_[t[1]].y;
        const double cx = points_[t[2]].x, cy = points_[t[2]].y;
        if (x < std::min({ax, bx, cx}) || x > std::max({ax, bx, cx}) || y < std::min({ay, by, cy}) ||
            y > std::max({ay, by, cy}))
            continue;
        const double det = (by - cy) * (ax - cx) + (cx - bx) * (ay - cy);
        double l0 = ((by - cy) * (x - cx) + (cx - bx) * (y - cy)) / det;
        double l1 = ((cy - ay) * (x - cx) + (ax - cx) * (y - cy)) / det;
        double l2 = 1.0 - l0 - l1;
        if (l0 < -eps || l1 < -eps || l2 < -eps) continue;
        l0 = std::max(l0, 0.0);
        l1 = std::max(l1, 0.0);
        l2 = std::max(l2, 0.0);
        const double sum = l0 + l1 + l2;
        return Hit{i, {l0 / sum, l1 / sum, l2 / sum}};
    }
    return std::nullopt;
}

namespace {

std::vector<GridLocation> keys_of(const std::map<GridLocation, double>& m) {
    std::vector<GridLocation> out;
    out.reserve(m.size());
    for (const auto& [k, v] : m) out.push_back(k);
    return out;
}

}  // namespace

LinearInterpolator::LinearInterpolator(const std::map<GridLocation, double>& sources)
    : sources_(sources), mesh_(keys_of(sources)) {
    values_.reserve(mesh_.points().size());
    for (const auto& p : mesh_.points()) values_.push_back(sources_.at(p));
}

double LinearInterpolator::operator()(double x, double y) const {
    if (x == std::floor(x) && y == std::floor(y) && std::abs(x) <= kMaxFabricCoordinate &&
        std::abs(y) <= kMaxFabricCoordinate) {
        if (auto it = sources_.find({static_cast<int>(x), static_cast<int>(y)}); it != sources_.end())
            return it->second;
    }
    if (const auto hit = mesh_.locate(x, y)) {
        const auto& t = mesh_.triangles()[hit->triangle];
        return hit->weights[0] * values_[t[0]] + hit->weights[1] * values_[t[1]] + hit->weights[2] * values_[t[2]];
    }
    double best = std::numeric_limits<double>::infinity();
    double value = 0.0;
    for (const auto& [loc, v] : sources_) {
        const double d = (loc.x - x) * (loc.x - x) + (loc.y - y) * (loc.y - y);
        if (d < best) {
            best = d;
            value = v;
        }
    }
    return value;
}

namespace {

template <typename Better>
MapExtremum extremum(const DegradationMap& map, Better better) {
    if (map.values.empty()) throw DataError("empty degradation map");
    std::size_t best = 0;
    for (std::size_t k = 1; k < map.values.size(); ++k)
        if (better(map.values[k], map.values[best])) best = k;
    return {map.x_at(best % map.resolution), map.y_at(best / map.resolution), map.values[best]};
}

}  // namespace

MapExtremum DegradationMap::minimum() const { return extremum(*this, std::less<>{}); }
MapExtremum DegradationMap::maximum() const { return extremum(*this, std::greater<>{}); }

std::map<GridLocation, double> location_medians(const std::vector<ShiftRecord>& records) {
    if (records.empty()) throw DataError("no shift records to map");
    std::map<GridLocation, std::vector<double>> grouped;
    for (const auto& r : records) grouped[r.location].push_back(r.delta);
    std::map<GridLocation, double> out;
    for (const auto& [loc, deltas] : grouped) out.emplace(loc, median(deltas));
    return out;
}

DegradationMap interpolate(const std::map<GridLocation, double>& sources, std::size_t resolution, Execution exec) {
    if (resolution < 2) throw ConfigError("map resolution must be at least 2");
    const LinearInterpolator interp(sources);

    DegradationMap map;
    map.resolution = resolution;
    map.sources = sources;
    int min_x = sources.begin()->first.x, max_x = min_x;
    int min_y = sources.begin()->first.y, max_y = min_y;
    for (const auto& [loc, v] : sources) {
        min_x = std::min(min_x, loc.x);
        max_x = std::max(max_x, loc.x);
        min_y = std::min(min_y, loc.y);
        max_y = std::max(max_y, loc.y);
    }
    map.x0 = min_x;
    map.y0 = min_y;
    map.dx = static_cast<double>(max_x - min_x) / static_cast<double>(resolution - 1);
    map.dy = static_cast<double>(max_y - min_y) / static_cast<double>(resolution - 1);
    map.values.resize(resolution * resolution);
    for_each_index(exec, map.values.size(), [&](std::size_t k) {
        map.values[k] = interp(map.x_at(k % resolution), map.y_at(k / resolution));
    });
    return map;
}

}  // namespace rofleet
