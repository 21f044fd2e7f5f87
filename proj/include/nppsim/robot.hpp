#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nppsim/coverage.hpp"
#include "nppsim/envsim.hpp"
#include "nppsim/events.hpp"
#include "nppsim/fedlearn.hpp"
#include "nppsim/rng.hpp"
#include "nppsim/vec2.hpp"

namespace nppsim::robot {

using coverage::CoveragePlan;
using coverage::GeoPoint;
using coverage::LocalFrame;
using envsim::ContaminationClass;
using envsim::GasField;
using envsim::GasVector;
using envsim::SensorReading;

struct InvalidStateError : std::logic_error {
    using std::logic_error::logic_error;
};

enum class Gas : std::uint8_t { Co2 = 0, Co = 1, Ch4 = 2 };

const char* gas_name(Gas g);

/// Critical-state payload: where, which gases exceeded which thresholds,
/// and when. Carries the full gas snapshot so telemetry can report every
/// channel, not just the offending ones.
struct ContaminationReport {
    GeoPoint location;
    std::map<Gas, std::pair<double, double>> exceeded;  // gas -> (measured, threshold)
    GasVector gases;
    double timestamp_s = 0.0;
};

// A report for exactly the gases strictly above threshold; nullopt when
// everything is within limits.
std::optional<ContaminationReport> detect(const SensorReading& reading, const GasVector& thresholds);

struct Battery {
    double level = 1.0;  // fraction of full charge
    double drain_per_meter = 0.0012;
    double drain_per_second = 0.0002;
    double charge_rate = 0.005;  // fraction per second
};

inline constexpr double kLowBatteryThreshold = 0.20;
inline constexpr double kLeaveDockThreshold = 1.0;

struct LabeledReading {
    SensorReading reading;
    ContaminationClass label = ContaminationClass::None;
};

/// Per-session history, consumed by on-dock training and then cleared.
struct SessionMemory {
    std::vector<LabeledReading> readings;
    std::uint32_t session_index = 1;
};

enum class Phase : std::uint8_t { Scanning, Critical, Charging };

struct RobotConfig {
    std::uint32_t robot_id = 0;
    LocalFrame frame;        // frame that plant positions resolve in (geo conversion)
    Vec2 plant_offset;       // this box's origin within that frame
    double box_width_m = 0.0;
    double box_length_m = 0.0;
    CoveragePlan plan;
    Vec2 dock{0.0, 0.0};
    double speed_mps = 1.0;
    double cadence_hz = 1.0;
    GasVector thresholds{1000.0, 35.0, 1000.0};
    Battery battery;
    double train_rate_samples_per_s = 50.0;  // on-dock training throughput
};

/// Charging-state output: the federated update, the held-out slice of this
/// session's data, training occupancy of the dock, and raw per-gas reading
/// statistics for the collective-threshold mode.
struct ChargeOutcome {
    fedlearn::LocalUpdate update;
    fedlearn::Dataset held_out;
    double train_duration_s = 0.0;
    std::size_t n_readings = 0;
    std::array<double, 3> gas_sum{0.0, 0.0, 0.0};     // co2, co, ch4
    std::array<double, 3> gas_sum_sq{0.0, 0.0, 0.0};
};

/// The three-state lifecycle machine. All mutation flows through the
/// orchestrator's event loop; the robot itself never talks to a clock.
class Robot {
  public:
    explicit Robot(RobotConfig cfg);

    // One scanning tick: sample, detect, move, drain. Throws
    // InvalidStateError outside Scanning.
    std::vector<Event> step(const GasField& field, double dt_s, double now_s, Rng& noise_rng);

    // Halt in place with the report pending transmission.
    void enter_critical(const ContaminationReport& report);

    // Acknowledgment from the local server; drains idle time and resumes
    // the plan. May emit BatteryLow if the wait crossed the threshold.
    std::vector<Event> acknowledge(double wait_s, double now_s);

    // Consumes SessionMemory: splits off the held-out fraction, trains on
    // the rest from the given global weights, archives and clears memory,
    // and advances the session counter.
    ChargeOutcome charging_cycle(const fedlearn::ModelWeights& global,
                                 const fedlearn::TrainConfig& train_cfg,
                                 const fedlearn::FeatureScaler& scaler, double test_fraction,
                                 Rng& split_rng, Rng& train_rng);

    // Leaves the dock with a freshly installed model; restarts the plan.
    void depart(const fedlearn::ModelWeights& global);

    void install_model(const fedlearn::ModelWeights& global) { model_ = global; }

    Phase phase() const { return phase_; }
    bool returning_to_dock() const { return returning_; }
    Vec2 position() const { return pos_; }
    Vec2 plant_position() const { return cfg_.plant_offset + pos_; }
    double battery_level() const { return battery_.level; }
    const RobotConfig& config() const { return cfg_; }
    const SessionMemory& memory() const { return memory_; }
    std::uint32_t session_index() const { return memory_.session_index; }
    const fedlearn::ModelWeights& model() const { return model_; }
    const std::optional<ContaminationReport>& pending_report() const { return pending_report_; }

    // Simulated-time cost of charging to full at the configured rate.
    double seconds_to_full_charge() const;
    void set_battery_level(double level);
    void set_thresholds(const GasVector& thresholds) { cfg_.thresholds = thresholds; }

  private:
    void drain(double meters, double seconds, std::vector<Event>& events, double now_s);
    double move_along_plan(double dist);
    double move_towards(Vec2 target, double dist);

    RobotConfig cfg_;
    Phase phase_ = Phase::Scanning;
    bool returning_ = false;
    Vec2 pos_;
    std::size_t next_waypoint_ = 0;
    bool plan_forward_ = true;
    Battery battery_;
    SessionMemory memory_;
    fedlearn::ModelWeights model_;
    std::optional<ContaminationReport> pending_report_;
};

}  // namespace nppsim::robot
