#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nppsim/coverage.hpp"
#include "nppsim/envsim.hpp"
#include "nppsim/fedlearn.hpp"
#include "nppsim/robot.hpp"

namespace nppsim::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class KeyMode { Otp, DeriveChaCha };

struct QkdParams {
    std::size_t n_qubits = 20000;
    double eve_fraction = 0.0;
    double channel_flip_prob = 0.0;
    double abort_threshold = 0.11;
    KeyMode key_mode = KeyMode::Otp;
    double latency_s = 2.0;       // per-exchange simulated delay
    std::size_t max_attempts = 3;
};

struct LearningParams {
    fedlearn::TrainConfig train;
    double test_fraction = 0.2;
    fedlearn::FeatureScaler scaler;
};

struct ThresholdParams {
    envsim::GasVector static_thresholds{1000.0, 35.0, 1000.0};
    // Experimental: derive next-session thresholds from globally pooled
    // reading statistics instead of the static values.
    bool collective = false;
    double collective_sd_multiplier = 6.0;
};

struct NetworkParams {
    double report_latency_s = 0.2;
    double ack_timeout_s = 5.0;
    double report_drop_prob = 0.0;  // fault injection, applies to frames and acks
};

struct RobotSpec {
    std::uint32_t robot_id = 0;
    double sw_lat = 0.0, sw_lon = 0.0, ne_lat = 0.0, ne_lon = 0.0;
    Vec2 dock{0.0, 0.0};
    double speed_mps = 1.0;
    double cadence_hz = 1.0;
    double strip_width_m = 3.0;
    coverage::Orientation orientation = coverage::Orientation::Vertical;
    robot::Battery battery;
    double train_rate_samples_per_s = 50.0;
    std::optional<envsim::GasVector> thresholds;  // falls back to the global setting

    coverage::GeoBoundingBox box() const;
};

struct ScenarioParams {
    std::size_t min_hotspots = 12;
    std::size_t max_hotspots = 16;
    envsim::Range radius_m{3.5, 4.5};
    envsim::Range onset_s{0.0, 0.0};
    envsim::Range co2_amplitude_ppm{900.0, 1500.0};
    envsim::Range co_amplitude_ppm{45.0, 80.0};
    envsim::Range ch4_amplitude_ppm{1000.0, 1600.0};
    std::vector<envsim::ContaminationClass> class_mix{
        envsim::ContaminationClass::Co2, envsim::ContaminationClass::Co,
        envsim::ContaminationClass::Ch4, envsim::ContaminationClass::Multi};
    envsim::GasVector background{420.0, 1.0, 2.0};
    envsim::GasVector noise_sd{30.0, 1.5, 35.0};
};

struct PlantSpec {
    std::uint32_t plant_id = 0;
    ScenarioParams scenario;
    std::vector<RobotSpec> robots;
};

struct SimConfig {
    std::uint64_t seed = 42;
    std::size_t sessions = 30;
    std::string output_dir = "out";
    QkdParams qkd;
    LearningParams learning;
    ThresholdParams thresholds;
    NetworkParams network;
    std::vector<PlantSpec> plants;

    void validate() const;  // throws ConfigError
};

// The experiment layout: two plants with four robots each, thirty sessions.
SimConfig default_config();

SimConfig load_config(const std::string& path);
SimConfig parse_config(const std::string& json_text);
std::string config_to_json(const SimConfig& config);

}  // namespace nppsim::config
