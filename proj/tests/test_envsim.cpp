#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "nppsim/envsim.hpp"

using namespace nppsim;
using namespace nppsim::envsim;

namespace {

GasField one_spot_field() {
    GasField field;
    field.background = {420.0, 1.0, 2.0};
    Hotspot h;
    h.center = {10.0, 10.0};
    h.amplitude = {1000.0, 0.0, 0.0};
    h.radius_m = 2.0;
    h.label = ContaminationClass::Co2;
    field.hotspots.push_back(h);
    return field;
}

}  // namespace

TEST_CASE("concentration with no hotspots is the background") {
    GasField field;
    field.background = {400.0, 2.0, 3.0};
    const auto c = concentration_at(field, {5.0, 5.0}, 100.0);
    CHECK(c.co2_ppm == 400.0);
    CHECK(c.co_ppm == 2.0);
    CHECK(c.ch4_ppm == 3.0);
}

TEST_CASE("concentration at a hotspot center adds the full amplitude") {
    const auto field = one_spot_field();
    const auto c = concentration_at(field, {10.0, 10.0}, 0.0);
    CHECK(c.co2_ppm == doctest::Approx(1420.0).epsilon(1e-12));
}

TEST_CASE("ten radii away the hotspot contribution vanishes") {
    const auto field = one_spot_field();
    const auto c = concentration_at(field, {10.0 + 20.0, 10.0}, 0.0);
    // exp(-50) ~ 1.9e-22
    CHECK(std::abs(c.co2_ppm - 420.0) / 420.0 < 1e-6);
}

TEST_CASE("hotspots activate at onset") {
    auto field = one_spot_field();
    field.hotspots[0].onset_s = 50.0;
    CHECK(concentration_at(field, {10.0, 10.0}, 49.0).co2_ppm == 420.0);
    CHECK(concentration_at(field, {10.0, 10.0}, 50.0).co2_ppm == doctest::Approx(1420.0));
}

TEST_CASE("superposition of hotspots") {
    GasField both = one_spot_field();
    Hotspot b;
    b.center = {14.0, 8.0};
    b.amplitude = {0.0, 50.0, 0.0};
    b.radius_m = 3.0;
    b.label = ContaminationClass::Co;
    both.hotspots.push_back(b);

    GasField only_b = both;
    only_b.hotspots.erase(only_b.hotspots.begin());
    GasField only_a = one_spot_field();

    for (double x = 0.0; x <= 20.0; x += 2.5) {
        for (double y = 0.0; y <= 20.0; y += 2.5) {
            const auto c_both = concentration_at(both, {x, y}, 0.0);
            const auto c_b = concentration_at(only_b, {x, y}, 0.0);
            const auto c_a = concentration_at(only_a, {x, y}, 0.0);
            const double lhs = c_both.co2_ppm - c_b.co2_ppm;
            const double rhs = c_a.co2_ppm - both.background.co2_ppm;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("field is smooth on the centimeter scale") {
    const auto field = one_spot_field();
    const double amp = field.hotspots[0].amplitude.max_component();
    for (double x = 6.0; x <= 14.0; x += 0.37) {
        const double a = concentration_at(field, {x, 10.0}, 0.0).co2_ppm;
        const double b = concentration_at(field, {x + 0.01, 10.0}, 0.0).co2_ppm;
        CHECK(std::abs(a - b) <= amp * 0.01);
    }
}

TEST_CASE("sampling") {
    const auto field = one_spot_field();
    const LocalFrame frame{GeoPoint{40.0, -74.0}, 20.0, 20.0};

    SUBCASE("zero noise reproduces the deterministic field") {
        auto rng = make_rng(1);
        const auto reading = sample(field, frame, {10.0, 10.0}, 33.0, rng);
        CHECK(reading.gases.co2_ppm == doctest::Approx(1420.0).epsilon(1e-12));
        CHECK(reading.timestamp_s == 33.0);
        CHECK(reading.position.lat > 40.0);
    }
    SUBCASE("fixed seed gives an identical reading sequence") {
        GasField noisy = field;
        noisy.noise_sd = {5.0, 0.5, 1.0};
        auto rng1 = make_rng(7);
        auto rng2 = make_rng(7);
        for (int i = 0; i < 50; ++i) {
            const auto a = sample(noisy, frame, {i * 0.1, 4.0}, i, rng1);
            const auto b = sample(noisy, frame, {i * 0.1, 4.0}, i, rng2);
            CHECK(a.gases.co2_ppm == b.gases.co2_ppm);
            CHECK(a.gases.co_ppm == b.gases.co_ppm);
            CHECK(a.gases.ch4_ppm == b.gases.ch4_ppm);
        }
    }
    SUBCASE("sample mean stays within the standard-error bound") {
        GasField noisy = field;
        noisy.noise_sd = {5.0, 0.0, 0.0};
        auto rng = make_rng(12345);
        double sum = 0.0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) sum += sample(noisy, frame, {0.0, 0.0}, 0.0, rng).gases.co2_ppm;
        const double truth = concentration_at(noisy, {0.0, 0.0}, 0.0).co2_ppm;
        CHECK(std::abs(sum / n - truth) < 3.0 * 5.0 / std::sqrt(static_cast<double>(n)));
    }
    SUBCASE("readings never go negative") {
        GasField noisy;
        noisy.background = {0.5, 0.1, 0.1};
        noisy.noise_sd = {50.0, 50.0, 50.0};
        auto rng = make_rng(3);
        for (int i = 0; i < 500; ++i) {
            const auto r = sample(noisy, frame, {1.0, 1.0}, 0.0, rng);
            CHECK(r.gases.co2_ppm >= 0.0);
            CHECK(r.gases.co_ppm >= 0.0);
            CHECK(r.gases.ch4_ppm >= 0.0);
        }
    }
}

TEST_CASE("true_class footprints") {
    auto field = one_spot_field();
    CHECK(true_class(field, {10.0, 10.0}, 0.0) == ContaminationClass::Co2);
    CHECK(true_class(field, {10.0, 10.0 + 3.9}, 0.0) == ContaminationClass::Co2);  // inside 2r
    CHECK(true_class(field, {10.0, 10.0 + 4.1}, 0.0) == ContaminationClass::None);

    Hotspot other;
    other.center = {11.0, 10.0};
    other.amplitude = {0.0, 60.0, 0.0};
    other.radius_m = 2.0;
    other.label = ContaminationClass::Co;
    field.hotspots.push_back(other);
    CHECK(true_class(field, {10.5, 10.0}, 0.0) == ContaminationClass::Multi);
}

TEST_CASE("field grid dump") {
    const auto field = one_spot_field();
    std::ostringstream os;
    write_field_csv(field, 20.0, 20.0, 10.0, 0.0, os);
    const std::string csv = os.str();
    CHECK(csv.find("x_m,y_m,co2_ppm,co_ppm,ch4_ppm\n") == 0);
    CHECK(csv.find("10.000,10.000,1420.0000") != std::string::npos);
    // 3x3 grid plus header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
}

TEST_CASE("generate_scenario") {
    ScenarioSpec spec;
    spec.width_m = 50.0;
    spec.length_m = 50.0;
    spec.class_mix = {ContaminationClass::Ch4};

    SUBCASE("zero hotspots leaves only the background") {
        spec.min_hotspots = spec.max_hotspots = 0;
        auto rng = make_rng(5);
        const auto field = generate_scenario(spec, rng);
        CHECK(field.hotspots.empty());
    }
    SUBCASE("same seed gives identical fields") {
        spec.min_hotspots = spec.max_hotspots = 3;
        auto rng1 = make_rng(5);
        auto rng2 = make_rng(5);
        const auto a = generate_scenario(spec, rng1);
        const auto b = generate_scenario(spec, rng2);
        REQUIRE(a.hotspots.size() == b.hotspots.size());
        for (std::size_t i = 0; i < a.hotspots.size(); ++i) {
            CHECK(a.hotspots[i].center == b.hotspots[i].center);
            CHECK(a.hotspots[i].radius_m == b.hotspots[i].radius_m);
        }
    }
    SUBCASE("three ch4 hotspots are exactly three ch4 hotspots") {
        spec.min_hotspots = spec.max_hotspots = 3;
        auto rng = make_rng(5);
        const auto field = generate_scenario(spec, rng);
        REQUIRE(field.hotspots.size() == 3);
        for (const auto& h : field.hotspots) {
            CHECK(h.label == ContaminationClass::Ch4);
            CHECK(h.amplitude.ch4_ppm > 0.0);
            CHECK(h.amplitude.co2_ppm == 0.0);
        }
    }
    SUBCASE("every requested class appears at least once") {
        spec.class_mix = {ContaminationClass::Co2, ContaminationClass::Co, ContaminationClass::Ch4,
                          ContaminationClass::Multi};
        spec.min_hotspots = spec.max_hotspots = 6;
        auto rng = make_rng(17);
        const auto field = generate_scenario(spec, rng);
        for (auto cls : spec.class_mix) {
            bool found = false;
            for (const auto& h : field.hotspots) found |= h.label == cls;
            CHECK(found);
        }
    }
    SUBCASE("empty class mix is an error") {
        spec.class_mix.clear();
        auto rng = make_rng(5);
        CHECK_THROWS_AS(generate_scenario(spec, rng), std::invalid_argument);
    }
}
