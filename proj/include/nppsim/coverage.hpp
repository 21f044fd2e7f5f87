#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nppsim/vec2.hpp"

namespace nppsim::coverage {

inline constexpr double kEarthRadiusM = 6371000.0;

/// Geodetic point in decimal degrees. Construction validates ranges.
struct GeoPoint {
    double lat = 0.0;  // [-90, 90]
    double lon = 0.0;  // [-180, 180]

    GeoPoint() = default;
    GeoPoint(double lat_deg, double lon_deg);
};

/// Axis-aligned geodetic rectangle, no wraparound support.
struct GeoBoundingBox {
    GeoPoint south_west;
    GeoPoint north_east;

    GeoBoundingBox(GeoPoint sw, GeoPoint ne);
};

// Flat-earth small-distance approximation. Note the asymmetry: only lat1
// enters the cosine, so callers sizing a box should pass the southern
// point first.
double geo_distance(const GeoPoint& p1, const GeoPoint& p2);

/// Local metric frame anchored at a box's south-west corner. x runs east,
/// y runs north, both in meters.
struct LocalFrame {
    GeoPoint origin;
    double width_m = 0.0;   // W, east-west extent
    double length_m = 0.0;  // L, south-north extent

    static LocalFrame from_box(const GeoBoundingBox& box);

    // Inverse of the geo_distance linearization at the origin.
    GeoPoint to_geo(double x_m, double y_m) const;
    GeoPoint to_geo(Vec2 p) const { return to_geo(p.x, p.y); }
};

enum class Orientation { Vertical, Horizontal };

/// Serpentine strip schedule over a local frame. Waypoints are strip
/// endpoints only; consecutive strips alternate traversal direction.
struct CoveragePlan {
    std::size_t strips = 0;
    double strip_width_m = 0.0;
    Orientation orientation = Orientation::Vertical;
    std::vector<Vec2> waypoints;  // 2 per strip
    double turn_distance_m = 0.0;
    double total_distance_m = 0.0;
};

// n = ceil(W / w). Throws std::invalid_argument on non-positive input.
std::size_t num_strips(double width_m, double coverage_width_m);

// Starting coordinate of each strip: vertical -> (i*w, 0), horizontal -> (0, i*w).
std::vector<Vec2> strip_origins(std::size_t n, double coverage_width_m, Orientation orientation);

// D = n*l + (n-1)*d.
double total_distance(std::size_t n, double strip_length_m, double turn_distance_m);

// Builds the serpentine plan for a frame. Strip origins follow the i*w
// schedule; when the far edge would sit farther than w/2 from the last
// strip, one extra boundary strip is appended so the whole rectangle
// stays within half a swath of the path. turn_distance defaults to the
// strip spacing w.
CoveragePlan plan_lawnmower(const LocalFrame& frame, double coverage_width_m,
                            Orientation orientation = Orientation::Vertical,
                            std::optional<double> turn_distance_m = std::nullopt);
CoveragePlan plan_lawnmower(const GeoBoundingBox& box, double coverage_width_m,
                            Orientation orientation = Orientation::Vertical,
                            std::optional<double> turn_distance_m = std::nullopt);

// CSV rows `strip_index,x_m,y_m`, one per waypoint.
void write_plan_csv(const CoveragePlan& plan, std::ostream& os);

}  // namespace nppsim::coverage
