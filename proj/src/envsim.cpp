#include "nppsim/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace nppsim::envsim {

double GasVector::max_component() const {
    return std::max({co2_ppm, co_ppm, ch4_ppm});
}

void GasVector::validate(const char* what) const {
    const bool ok = std::isfinite(co2_ppm) && std::isfinite(co_ppm) && std::isfinite(ch4_ppm) &&
                    co2_ppm >= 0.0 && co_ppm >= 0.0 && ch4_ppm >= 0.0;
    if (!ok) throw std::invalid_argument(std::string(what) + ": gas vector must be finite and non-negative");
}

const char* class_name(ContaminationClass c) {
    switch (c) {
        case ContaminationClass::None: return "none";
        case ContaminationClass::Co2: return "co2";
        case ContaminationClass::Co: return "co";
        case ContaminationClass::Ch4: return "ch4";
        case ContaminationClass::Multi: return "multi";
    }
    return "?";
}

ContaminationClass class_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        const auto c = static_cast<ContaminationClass>(i);
        if (name == class_name(c)) return c;
    }
    throw std::invalid_argument("unknown contamination class: " + name);
}

GasVector concentration_at(const GasField& field, Vec2 pos, double t_s) {
    if (t_s < 0.0) throw std::invalid_argument("concentration_at: time must be non-negative");
    GasVector out = field.background;
    for (const Hotspot& h : field.hotspots) {
        if (t_s < h.onset_s) continue;
        const double r2 = (pos - h.center).x * (pos - h.center).x + (pos - h.center).y * (pos - h.center).y;
        const double g = std::exp(-r2 / (2.0 * h.radius_m * h.radius_m));
        out = out + h.amplitude * g;
    }
    return out;
}

SensorReading sample(const GasField& field, const LocalFrame& frame, Vec2 pos, double t_s, Rng& rng) {
    const GasVector truth = concentration_at(field, pos, t_s);
    SensorReading reading;
    reading.position = frame.to_geo(pos);
    reading.timestamp_s = t_s;
    auto noisy = [&rng](double mean, double sd) {
        if (sd <= 0.0) return std::max(0.0, mean);
        std::normal_distribution<double> dist(mean, sd);
        return std::max(0.0, dist(rng));
    };
    reading.gases.co2_ppm = noisy(truth.co2_ppm, field.noise_sd.co2_ppm);
    reading.gases.co_ppm = noisy(truth.co_ppm, field.noise_sd.co_ppm);
    reading.gases.ch4_ppm = noisy(truth.ch4_ppm, field.noise_sd.ch4_ppm);
    return reading;
}

ContaminationClass true_class(const GasField& field, Vec2 pos, double t_s) {
    ContaminationClass found = ContaminationClass::None;
    for (const Hotspot& h : field.hotspots) {
        if (t_s < h.onset_s) continue;
        if (distance(pos, h.center) > 2.0 * h.radius_m) continue;
        if (found == ContaminationClass::None) {
            found = h.label;
        } else if (found != h.label) {
            return ContaminationClass::Multi;
        }
    }
    return found;
}

namespace {

double draw(Range r, Rng& rng) {
    if (r.hi <= r.lo) return r.lo;
    std::uniform_real_distribution<double> dist(r.lo, r.hi);
    return dist(rng);
}

GasVector amplitude_for(ContaminationClass c, const ScenarioSpec& spec, Rng& rng) {
    GasVector a;
    const bool co2 = c == ContaminationClass::Co2 || c == ContaminationClass::Multi;
    const bool co = c == ContaminationClass::Co || c == ContaminationClass::Multi;
    const bool ch4 = c == ContaminationClass::Ch4 || c == ContaminationClass::Multi;
    if (co2) a.co2_ppm = draw(spec.co2_amplitude_ppm, rng);
    if (co) a.co_ppm = draw(spec.co_amplitude_ppm, rng);
    if (ch4) a.ch4_ppm = draw(spec.ch4_amplitude_ppm, rng);
    return a;
}

}  // namespace

GasField generate_scenario(const ScenarioSpec& spec, Rng& rng) {
    if (spec.class_mix.empty())
        throw std::invalid_argument("generate_scenario: class mix must not be empty");
    spec.background.validate("generate_scenario background");
    GasField field;
    field.background = spec.background;
    field.noise_sd = spec.noise_sd;

    std::size_t count = spec.min_hotspots;
    if (spec.max_hotspots > spec.min_hotspots) {
        std::uniform_int_distribution<std::size_t> dist(spec.min_hotspots, spec.max_hotspots);
        count = dist(rng);
    }
    if (count == 0) return field;

    // Distinct classes in mix order first, so every requested class shows up;
    // the remainder cycles through the mix to keep class support even.
    std::vector<ContaminationClass> labels;
    for (ContaminationClass c : spec.class_mix) {
        if (std::find(labels.begin(), labels.end(), c) == labels.end()) labels.push_back(c);
    }
    count = std::max(count, labels.size());
    for (std::size_t i = 0; labels.size() < count; ++i)
        labels.push_back(spec.class_mix[i % spec.class_mix.size()]);

    // Stratified placement: one hotspot per equal-width slot across the
    // area, jittered inside its slot. Spreads contamination over the whole
    // site instead of letting a draw clump everything in one corner.
    const double slot_w = spec.width_m / static_cast<double>(count);
    field.hotspots.reserve(count);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        Hotspot h;
        const double x_lo = static_cast<double>(i) * slot_w;
        h.center = {draw({x_lo, x_lo + slot_w}, rng), draw({0.0, spec.length_m}, rng)};
        h.radius_m = draw(spec.radius_m, rng);
        h.onset_s = draw(spec.onset_s, rng);
        h.label = labels[i];
        h.amplitude = amplitude_for(labels[i], spec, rng);
        field.hotspots.push_back(h);
    }
    return field;
}

void write_field_csv(const GasField& field, double width_m, double length_m, double step_m,
                     double t_s, std::ostream& os) {
    os << "x_m,y_m,co2_ppm,co_ppm,ch4_ppm\n";
    char line[160];
    for (double y = 0.0; y <= length_m; y += step_m) {
        for (double x = 0.0; x <= width_m; x += step_m) {
            const GasVector g = concentration_at(field, {x, y}, t_s);
            std::snprintf(line, sizeof line, "%.3f,%.3f,%.4f,%.4f,%.4f\n", x, y, g.co2_ppm, g.co_ppm, g.ch4_ppm);
            os << line;
        }
    }
}

}  // namespace nppsim::envsim
