#include "nppsim/coverage.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace nppsim::coverage {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

GeoPoint::GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
    if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg))
        throw std::invalid_argument("GeoPoint: coordinates must be finite");
    if (lat_deg < -90.0 || lat_deg > 90.0)
        throw std::invalid_argument("GeoPoint: latitude out of [-90, 90]");
    if (lon_deg < -180.0 || lon_deg > 180.0)
        throw std::invalid_argument("GeoPoint: longitude out of [-180, 180]");
}

GeoBoundingBox::GeoBoundingBox(GeoPoint sw, GeoPoint ne) : south_west(sw), north_east(ne) {
    if (!(ne.lat > sw.lat) || !(ne.lon > sw.lon))
        throw std::invalid_argument("GeoBoundingBox: north_east must lie strictly north-east of south_west");
}

double geo_distance(const GeoPoint& p1, const GeoPoint& p2) {
    const double dlat = (p2.lat - p1.lat) * kDegToRad;
    const double dlon = (p2.lon - p1.lon) * kDegToRad;
    const double east = std::cos(p1.lat * kDegToRad) * dlon;
    return kEarthRadiusM * std::sqrt(dlat * dlat + east * east);
}

LocalFrame LocalFrame::from_box(const GeoBoundingBox& box) {
    const GeoPoint& sw = box.south_west;
    LocalFrame f;
    f.origin = sw;
    f.width_m = geo_distance(sw, GeoPoint{sw.lat, box.north_east.lon});
    f.length_m = geo_distance(sw, GeoPoint{box.north_east.lat, sw.lon});
    return f;
}

GeoPoint LocalFrame::to_geo(double x_m, double y_m) const {
    const double lat = origin.lat + (y_m / kEarthRadiusM) / kDegToRad;
    const double lon = origin.lon + (x_m / (kEarthRadiusM * std::cos(origin.lat * kDegToRad))) / kDegToRad;
    return GeoPoint{lat, lon};
}

std::size_t num_strips(double width_m, double coverage_width_m) {
    if (!(width_m > 0.0) || !(coverage_width_m > 0.0))
        throw std::invalid_argument("num_strips: width and coverage width must be positive");
    const double n = std::ceil(width_m / coverage_width_m);
    return static_cast<std::size_t>(n);
}

std::vector<Vec2> strip_origins(std::size_t n, double coverage_width_m, Orientation orientation) {
    if (n < 1 || !(coverage_width_m > 0.0))
        throw std::invalid_argument("strip_origins: need n >= 1 and positive coverage width");
    std::vector<Vec2> origins;
    origins.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double off = static_cast<double>(i) * coverage_width_m;
        if (orientation == Orientation::Vertical)
            origins.push_back({off, 0.0});
        else
            origins.push_back({0.0, off});
    }
    return origins;
}

double total_distance(std::size_t n, double strip_length_m, double turn_distance_m) {
    if (n < 1 || !(strip_length_m > 0.0) || turn_distance_m < 0.0)
        throw std::invalid_argument("total_distance: need n >= 1, positive length, non-negative turn distance");
    return static_cast<double>(n) * strip_length_m + static_cast<double>(n - 1) * turn_distance_m;
}

CoveragePlan plan_lawnmower(const LocalFrame& frame, double coverage_width_m,
                            Orientation orientation, std::optional<double> turn_distance_m) {
    const double span = orientation == Orientation::Vertical ? frame.width_m : frame.length_m;
    const double run = orientation == Orientation::Vertical ? frame.length_m : frame.width_m;
    if (!(coverage_width_m > 0.0))
        throw std::invalid_argument("plan_lawnmower: coverage width must be positive");
    if (coverage_width_m > span)
        throw std::invalid_argument("plan_lawnmower: strip width exceeds box extent");
    const double w = coverage_width_m;
    const double d = turn_distance_m.value_or(w);
    if (d < 0.0) throw std::invalid_argument("plan_lawnmower: turn distance must be non-negative");

    const std::size_t n = num_strips(span, w);
    std::vector<double> offsets;
    offsets.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) offsets.push_back(static_cast<double>(i) * w);
    // The i*w schedule leaves the far edge up to w from the last strip; a
    // boundary strip keeps every point of the rectangle within half a swath.
    const bool boundary_strip = span - offsets.back() > w / 2.0;
    if (boundary_strip) offsets.push_back(span);

    CoveragePlan plan;
    plan.strips = offsets.size();
    plan.strip_width_m = w;
    plan.orientation = orientation;
    plan.turn_distance_m = d;
    plan.waypoints.reserve(2 * plan.strips);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const double lo = (i % 2 == 0) ? 0.0 : run;
        const double hi = (i % 2 == 0) ? run : 0.0;
        if (orientation == Orientation::Vertical) {
            plan.waypoints.push_back({offsets[i], lo});
            plan.waypoints.push_back({offsets[i], hi});
        } else {
            plan.waypoints.push_back({lo, offsets[i]});
            plan.waypoints.push_back({hi, offsets[i]});
        }
    }

    // n*l + (n-1)*d over the uniform schedule; the boundary turn, when
    // present, is costed at its actual gap.
    double total = static_cast<double>(n) * run + static_cast<double>(n - 1) * d;
    if (boundary_strip) total += run + (span - static_cast<double>(n - 1) * w);
    plan.total_distance_m = total;
    return plan;
}

CoveragePlan plan_lawnmower(const GeoBoundingBox& box, double coverage_width_m,
                            Orientation orientation, std::optional<double> turn_distance_m) {
    return plan_lawnmower(LocalFrame::from_box(box), coverage_width_m, orientation, turn_distance_m);
}

void write_plan_csv(const CoveragePlan& plan, std::ostream& os) {
    os << "strip_index,x_m,y_m\n";
    char line[96];
    for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.6f,%.6f\n", i / 2, plan.waypoints[i].x, plan.waypoints[i].y);
        os << line;
    }
}

}  // namespace nppsim::coverage
