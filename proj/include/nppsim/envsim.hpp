#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nppsim/coverage.hpp"
#include "nppsim/rng.hpp"
#include "nppsim/vec2.hpp"

namespace nppsim::envsim {

using coverage::GeoPoint;
using coverage::LocalFrame;

/// Gas concentrations in ppm, always finite and non-negative.
struct GasVector {
    double co2_ppm = 0.0;
    double co_ppm = 0.0;
    double ch4_ppm = 0.0;

    friend GasVector operator+(GasVector a, GasVector b) {
        return {a.co2_ppm + b.co2_ppm, a.co_ppm + b.co_ppm, a.ch4_ppm + b.ch4_ppm};
    }
    friend GasVector operator*(GasVector a, double s) {
        return {a.co2_ppm * s, a.co_ppm * s, a.ch4_ppm * s};
    }
    double max_component() const;
    void validate(const char* what) const;  // throws on negative or non-finite
};

// Contamination classes: one per monitored gas, a combination class, and
// the clean background class.
enum class ContaminationClass : std::uint8_t { None = 0, Co2 = 1, Co = 2, Ch4 = 3, Multi = 4 };
inline constexpr std::size_t kNumClasses = 5;

const char* class_name(ContaminationClass c);
ContaminationClass class_from_name(const std::string& name);

/// Localized Gaussian contamination source ("red spot").
struct Hotspot {
    Vec2 center;
    GasVector amplitude;  // peak excess over background
    double radius_m = 1.0;
    double onset_s = 0.0;
    ContaminationClass label = ContaminationClass::None;
};

/// Immutable synthetic atmosphere: background plus hotspots, with per-gas
/// additive Gaussian sensor noise applied at sampling time.
struct GasField {
    GasVector background;
    std::vector<Hotspot> hotspots;
    GasVector noise_sd;
};

/// One timestamped point sample of the field.
struct SensorReading {
    GeoPoint position;
    GasVector gases;
    double timestamp_s = 0.0;
};

// Deterministic field value: background plus every active hotspot's
// Gaussian profile. No noise.
GasVector concentration_at(const GasField& field, Vec2 pos, double t_s);

// Noisy sensor sample at a position, clamped at zero; position is reported
// in geodetic coordinates of the given frame.
SensorReading sample(const GasField& field, const LocalFrame& frame, Vec2 pos, double t_s, Rng& rng);

// Ground-truth class at a position: hotspots whose 2*radius footprint
// contains the point. Several distinct gas classes collapse to Multi.
ContaminationClass true_class(const GasField& field, Vec2 pos, double t_s);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Recipe for randomized fields: hotspot count, geometry and amplitude
/// ranges, and the class mix to draw labels from.
struct ScenarioSpec {
    double width_m = 0.0;   // placement area
    double length_m = 0.0;
    std::size_t min_hotspots = 0;
    std::size_t max_hotspots = 0;
    Range radius_m{2.0, 4.0};
    Range onset_s{0.0, 0.0};
    Range co2_amplitude_ppm{800.0, 1600.0};
    Range co_amplitude_ppm{40.0, 90.0};
    Range ch4_amplitude_ppm{900.0, 1800.0};
    std::vector<ContaminationClass> class_mix;
    GasVector background{420.0, 1.0, 2.0};
    GasVector noise_sd{0.0, 0.0, 0.0};
};

// Reproducible field for a given seed; every class in the mix appears at
// least once whenever any hotspots are requested.
GasField generate_scenario(const ScenarioSpec& spec, Rng& rng);

// Grid dump `x_m,y_m,co2_ppm,co_ppm,ch4_ppm` for external visualization.
void write_field_csv(const GasField& field, double width_m, double length_m, double step_m,
                     double t_s, std::ostream& os);

}  // namespace nppsim::envsim
