#include <random>
#include <sstream>

#include "doctest.h"
#include "nppsim/coverage.hpp"

using namespace nppsim;
using namespace nppsim::coverage;

namespace {

// Brute-force oracle: max distance from any grid point of the rectangle to
// the waypoint polyline.
double max_grid_distance(const CoveragePlan& plan, double width_m, double length_m, double grid_m,
                         bool cell_centers = false) {
    double worst = 0.0;
    const double off = cell_centers ? grid_m / 2.0 : 0.0;
    for (double y = off; y <= length_m; y += grid_m) {
        for (double x = off; x <= width_m; x += grid_m) {
            double best = 1e300;
            for (std::size_t i = 0; i + 1 < plan.waypoints.size(); ++i)
                best = std::min(best, distance_to_segment({x, y}, plan.waypoints[i], plan.waypoints[i + 1]));
            worst = std::max(worst, best);
        }
    }
    return worst;
}

double polyline_length(const CoveragePlan& plan) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < plan.waypoints.size(); ++i)
        total += distance(plan.waypoints[i], plan.waypoints[i + 1]);
    return total;
}

}  // namespace

TEST_CASE("num_strips ceiling arithmetic") {
    CHECK(num_strips(10.0, 3.0) == 4);
    CHECK(num_strips(10.0, 5.0) == 2);
    CHECK(num_strips(10.0, 10.0) == 1);
    CHECK_THROWS_AS(num_strips(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(num_strips(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("num_strips ceiling definition holds for random inputs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 500.0);
    for (int i = 0; i < 500; ++i) {
        const double W = u(rng), w = u(rng);
        const auto n = static_cast<double>(num_strips(W, w));
        CHECK(n * w >= W);
        CHECK((n - 1.0) * w < W);
    }
}

TEST_CASE("strip_origins follows the i*w schedule") {
    const auto vertical = strip_origins(3, 2.0, Orientation::Vertical);
    REQUIRE(vertical.size() == 3);
    CHECK(vertical[0] == Vec2{0.0, 0.0});
    CHECK(vertical[1] == Vec2{2.0, 0.0});
    CHECK(vertical[2] == Vec2{4.0, 0.0});

    const auto horizontal = strip_origins(3, 2.0, Orientation::Horizontal);
    CHECK(horizontal[1] == Vec2{0.0, 2.0});
    CHECK(horizontal[2] == Vec2{0.0, 4.0});

    const auto single = strip_origins(1, 5.0, Orientation::Vertical);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == Vec2{0.0, 0.0});
}

TEST_CASE("total_distance") {
    CHECK(total_distance(4, 10.0, 3.0) == doctest::Approx(49.0).epsilon(1e-15));
    CHECK(total_distance(1, 10.0, 7.0) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(total_distance(2, 5.0, 1.0) == doctest::Approx(11.0).epsilon(1e-15));
    CHECK_THROWS_AS(total_distance(0, 10.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(total_distance(2, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("geo_distance reference values") {
    CHECK(geo_distance({0.0, 0.0}, {0.0, 0.0}) == 0.0);
    // one degree of latitude at the equator
    CHECK(std::abs(geo_distance({0.0, 0.0}, {1.0, 0.0}) - 111194.927) < 1e-3);
    // cos(60 deg) halves the east-west meter per degree
    CHECK(std::abs(geo_distance({60.0, 0.0}, {60.0, 1.0}) - 55597.463) < 1e-3);
}

TEST_CASE("geo_distance symmetry on a parallel, zero at a point") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-179.0, 179.0);
    for (int i = 0; i < 200; ++i) {
        const GeoPoint p{lat(rng), lon(rng)};
        CHECK(geo_distance(p, p) == 0.0);
        const GeoPoint q{p.lat, lon(rng)};
        CHECK(geo_distance(p, q) == doctest::Approx(geo_distance(q, p)).epsilon(1e-14));
    }
}

TEST_CASE("GeoPoint and GeoBoundingBox validation") {
    CHECK_THROWS_AS(GeoPoint(91.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GeoPoint(0.0, 181.0), std::invalid_argument);
    CHECK_THROWS_AS(GeoPoint(std::nan(""), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GeoBoundingBox(GeoPoint(1.0, 1.0), GeoPoint(1.0, 2.0)), std::invalid_argument);
    CHECK_THROWS_AS(GeoBoundingBox(GeoPoint(1.0, 2.0), GeoPoint(2.0, 2.0)), std::invalid_argument);
}

TEST_CASE("local frame round trip") {
    const GeoPoint origin{40.0, -74.0};
    const LocalFrame frame{origin, 100.0, 100.0};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng), y = u(rng);
        const GeoPoint p = frame.to_geo(x, y);
        CHECK(geo_distance(origin, p) == doctest::Approx(std::hypot(x, y)).epsilon(1e-9));
    }
}

TEST_CASE("plan_lawnmower two-strip box grows a boundary strip for full coverage") {
    // 10 m box with w = 5: the i*w schedule alone leaves the east edge 5 m
    // from the last strip, so the plan carries a third strip at x = 10.
    const LocalFrame frame{GeoPoint{0.0, 0.0}, 10.0, 10.0};
    const auto plan = plan_lawnmower(frame, 5.0);
    CHECK(plan.strips == 3);
    REQUIRE(plan.waypoints.size() == 6);
    CHECK(plan.waypoints[0] == Vec2{0.0, 0.0});
    CHECK(plan.waypoints[1] == Vec2{0.0, 10.0});
    CHECK(plan.waypoints[2] == Vec2{5.0, 10.0});
    CHECK(plan.waypoints[3] == Vec2{5.0, 0.0});
    CHECK(plan.waypoints[4] == Vec2{10.0, 0.0});
    CHECK(plan.waypoints[5] == Vec2{10.0, 10.0});
    CHECK(max_grid_distance(plan, 10.0, 10.0, 0.25) <= 2.5 + 1e-9);
}

TEST_CASE("plan_lawnmower 9 m box with w = 2 keeps exactly the five scheduled strips") {
    const LocalFrame frame{GeoPoint{0.0, 0.0}, 9.0, 9.0};
    const auto plan = plan_lawnmower(frame, 2.0);
    CHECK(plan.strips == 5);
    CHECK(plan.waypoints.size() == 10);
    // every 0.5 m grid cell center within w/2 = 1 m of the traced path
    CHECK(max_grid_distance(plan, 9.0, 9.0, 0.5, true) <= 1.0 + 1e-9);
}

TEST_CASE("plan_lawnmower rejects oversized strip width") {
    const LocalFrame frame{GeoPoint{0.0, 0.0}, 10.0, 10.0};
    CHECK_THROWS_AS(plan_lawnmower(frame, 11.0), std::invalid_argument);
    CHECK_THROWS_AS(plan_lawnmower(frame, 0.0), std::invalid_argument);
}

TEST_CASE("plan_lawnmower horizontal orientation") {
    const LocalFrame frame{GeoPoint{0.0, 0.0}, 12.0, 9.0};
    const auto plan = plan_lawnmower(frame, 2.0, Orientation::Horizontal);
    CHECK(plan.strips == 5);
    CHECK(plan.waypoints[0] == Vec2{0.0, 0.0});
    CHECK(plan.waypoints[1] == Vec2{12.0, 0.0});
    CHECK(plan.waypoints[2] == Vec2{12.0, 2.0});
    CHECK(max_grid_distance(plan, 12.0, 9.0, 0.25) <= 1.0 + 1e-9);
}

TEST_CASE("coverage completeness on randomized boxes") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dim(6.0, 40.0), w_frac(0.05, 0.9);
    for (int i = 0; i < 20; ++i) {
        const double W = dim(rng), L = dim(rng);
        const double w = std::max(0.5, W * w_frac(rng));
        const LocalFrame frame{GeoPoint{0.0, 0.0}, W, L};
        const auto plan = plan_lawnmower(frame, w);
        CAPTURE(W);
        CAPTURE(L);
        CAPTURE(w);
        CHECK(max_grid_distance(plan, W, L, 0.25) <= w / 2.0 + 1e-9);
        for (const Vec2& p : plan.waypoints) {
            CHECK(p.x >= -1e-12);
            CHECK(p.x <= W + 1e-12);
            CHECK(p.y >= -1e-12);
            CHECK(p.y <= L + 1e-12);
        }
        CHECK(plan.waypoints.size() == 2 * plan.strips);
    }
}

TEST_CASE("plan total distance matches the schedule and the traced polyline") {
    // W = 8.8, w = 2: strips at 0,2,4,6,8; the far gap of 0.8 stays within
    // half a swath, so no boundary strip and the n*l + (n-1)*d form applies.
    const LocalFrame frame{GeoPoint{0.0, 0.0}, 8.8, 10.0};
    const auto plan = plan_lawnmower(frame, 2.0);
    CHECK(plan.strips == 5);
    CHECK(plan.total_distance_m == doctest::Approx(total_distance(5, 10.0, 2.0)).epsilon(1e-15));
    CHECK(plan.total_distance_m == doctest::Approx(polyline_length(plan)).epsilon(1e-12));

    // With the boundary strip the total still equals the traced polyline.
    const LocalFrame frame2{GeoPoint{0.0, 0.0}, 10.0, 10.0};
    const auto plan2 = plan_lawnmower(frame2, 5.0);
    CHECK(plan2.total_distance_m == doctest::Approx(polyline_length(plan2)).epsilon(1e-12));
}

TEST_CASE("plan CSV export") {
    const LocalFrame frame{GeoPoint{0.0, 0.0}, 4.0, 6.0};
    const auto plan = plan_lawnmower(frame, 2.0);
    std::ostringstream os;
    write_plan_csv(plan, os);
    const std::string csv = os.str();
    CHECK(csv.find("strip_index,x_m,y_m\n") == 0);
    CHECK(csv.find("0,0.000000,0.000000") != std::string::npos);
    CHECK(csv.find("0,0.000000,6.000000") != std::string::npos);
}
