#include "nppsim/robot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nppsim::robot {

const char* gas_name(Gas g) {
    switch (g) {
        case Gas::Co2: return "co2";
        case Gas::Co: return "co";
        case Gas::Ch4: return "ch4";
    }
    return "?";
}

std::optional<ContaminationReport> detect(const SensorReading& reading, const GasVector& thresholds) {
    thresholds.validate("detect thresholds");
    if (thresholds.co2_ppm <= 0.0 || thresholds.co_ppm <= 0.0 || thresholds.ch4_ppm <= 0.0)
        throw std::invalid_argument("detect: thresholds must be positive");
    ContaminationReport report;
    report.location = reading.position;
    report.gases = reading.gases;
    report.timestamp_s = reading.timestamp_s;
    if (reading.gases.co2_ppm > thresholds.co2_ppm)
        report.exceeded[Gas::Co2] = {reading.gases.co2_ppm, thresholds.co2_ppm};
    if (reading.gases.co_ppm > thresholds.co_ppm)
        report.exceeded[Gas::Co] = {reading.gases.co_ppm, thresholds.co_ppm};
    if (reading.gases.ch4_ppm > thresholds.ch4_ppm)
        report.exceeded[Gas::Ch4] = {reading.gases.ch4_ppm, thresholds.ch4_ppm};
    if (report.exceeded.empty()) return std::nullopt;
    return report;
}

Robot::Robot(RobotConfig cfg) : cfg_(std::move(cfg)), battery_(cfg_.battery) {
    if (cfg_.plan.waypoints.empty()) throw std::invalid_argument("Robot: coverage plan has no waypoints");
    if (!(cfg_.speed_mps > 0.0) || !(cfg_.cadence_hz > 0.0))
        throw std::invalid_argument("Robot: speed and cadence must be positive");
    if (battery_.level < 0.0 || battery_.level > 1.0)
        throw std::invalid_argument("Robot: battery level must be in [0, 1]");
    pos_ = cfg_.dock;
    returning_ = battery_.level < kLowBatteryThreshold;
    model_ = fedlearn::ModelWeights::zeros(envsim::kNumClasses, fedlearn::FeatureScaler::kFeatures);
}

void Robot::set_battery_level(double level) {
    if (level < 0.0 || level > 1.0) throw std::invalid_argument("battery level must be in [0, 1]");
    battery_.level = level;
}

double Robot::seconds_to_full_charge() const {
    return (1.0 - battery_.level) / battery_.charge_rate;
}

void Robot::drain(double meters, double seconds, std::vector<Event>& events, double now_s) {
    const double before = battery_.level;
    battery_.level = std::max(
        0.0, battery_.level - meters * battery_.drain_per_meter - seconds * battery_.drain_per_second);
    if (before >= kLowBatteryThreshold && battery_.level < kLowBatteryThreshold) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "level=%.4f", battery_.level);
        events.push_back({now_s, cfg_.robot_id, EventKind::BatteryLow, buf});
        returning_ = true;
    }
}

double Robot::move_towards(Vec2 target, double dist) {
    const double gap = distance(pos_, target);
    if (gap <= dist) {
        pos_ = target;
        return gap;
    }
    const Vec2 dir = (target - pos_) * (1.0 / gap);
    pos_ = pos_ + dir * dist;
    return dist;
}

double Robot::move_along_plan(double dist) {
    const auto& wp = cfg_.plan.waypoints;
    double moved = 0.0;
    while (dist > 1e-12) {
        const Vec2 target = wp[next_waypoint_];
        const double step = move_towards(target, dist);
        moved += step;
        dist -= step;
        if (pos_ == target) {
            // Ping-pong over the serpentine so multi-pass sessions keep covering.
            if (plan_forward_) {
                if (next_waypoint_ + 1 < wp.size()) {
                    ++next_waypoint_;
                } else {
                    plan_forward_ = false;
                    if (wp.size() > 1) --next_waypoint_;
                    else break;  // single-point plan, nowhere to go
                }
            } else {
                if (next_waypoint_ > 0) {
                    --next_waypoint_;
                } else {
                    plan_forward_ = true;
                    if (wp.size() > 1) ++next_waypoint_;
                    else break;
                }
            }
        }
    }
    return moved;
}

std::vector<Event> Robot::step(const GasField& field, double dt_s, double now_s, Rng& noise_rng) {
    if (phase_ != Phase::Scanning)
        throw InvalidStateError("step: robot is not in the scanning state");
    if (!(dt_s > 0.0)) throw std::invalid_argument("step: dt must be positive");

    std::vector<Event> events;

    if (returning_) {
        const double moved = move_towards(cfg_.dock, cfg_.speed_mps * dt_s);
        drain(moved, dt_s, events, now_s);
        if (pos_ == cfg_.dock) {
            phase_ = Phase::Charging;
            char buf[64];
            std::snprintf(buf, sizeof buf, "level=%.4f", battery_.level);
            events.push_back({now_s, cfg_.robot_id, EventKind::DockArrive, buf});
        }
        return events;
    }

    // Advance along the plan, then sample at the new position. Sampling
    // after the move lets a robot resumed from Critical make progress
    // instead of re-detecting the same spot forever.
    const double moved = move_along_plan(cfg_.speed_mps * dt_s);
    drain(moved, dt_s, events, now_s);

    const SensorReading reading = envsim::sample(field, cfg_.frame, plant_position(), now_s, noise_rng);
    const ContaminationClass label = envsim::true_class(field, plant_position(), now_s);
    memory_.readings.push_back({reading, label});
    {
        char buf[96];
        std::snprintf(buf, sizeof buf, "co2=%.2f co=%.2f ch4=%.2f label=%s", reading.gases.co2_ppm,
                      reading.gases.co_ppm, reading.gases.ch4_ppm, envsim::class_name(label));
        events.push_back({now_s, cfg_.robot_id, EventKind::ReadingTaken, buf});
    }

    if (auto report = detect(reading, cfg_.thresholds)) {
        std::string detail;
        for (const auto& [gas, levels] : report->exceeded) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%s%s=%.2f>%.2f", detail.empty() ? "" : " ", gas_name(gas),
                          levels.first, levels.second);
            detail += buf;
        }
        events.push_back({now_s, cfg_.robot_id, EventKind::ThresholdExceeded, detail});
        enter_critical(*report);
    }
    return events;
}

void Robot::enter_critical(const ContaminationReport& report) {
    if (phase_ != Phase::Scanning)
        throw InvalidStateError("enter_critical: robot must be scanning");
    if (report.exceeded.empty())
        throw std::invalid_argument("enter_critical: report lists no exceeded gases");
    phase_ = Phase::Critical;
    pending_report_ = report;
}

std::vector<Event> Robot::acknowledge(double wait_s, double now_s) {
    if (phase_ != Phase::Critical)
        throw InvalidStateError("acknowledge: robot is not in the critical state");
    std::vector<Event> events;
    drain(0.0, wait_s, events, now_s);  // idle drain while halted
    pending_report_.reset();
    phase_ = Phase::Scanning;
    return events;
}

ChargeOutcome Robot::charging_cycle(const fedlearn::ModelWeights& global,
                                    const fedlearn::TrainConfig& train_cfg,
                                    const fedlearn::FeatureScaler& scaler, double test_fraction,
                                    Rng& split_rng, Rng& train_rng) {
    if (phase_ != Phase::Charging)
        throw InvalidStateError("charging_cycle: robot is not docked");

    ChargeOutcome outcome;
    const std::uint32_t session = memory_.session_index;
    outcome.n_readings = memory_.readings.size();
    for (const LabeledReading& r : memory_.readings) {
        const double v[3] = {r.reading.gases.co2_ppm, r.reading.gases.co_ppm, r.reading.gases.ch4_ppm};
        for (int g = 0; g < 3; ++g) {
            outcome.gas_sum[g] += v[g];
            outcome.gas_sum_sq[g] += v[g] * v[g];
        }
    }

    if (memory_.readings.empty()) {
        // Nothing to learn from: a no-op update that aggregation will skip.
        outcome.update.weights = global;
        outcome.update.n_samples = 0;
        outcome.update.robot_id = cfg_.robot_id;
        outcome.update.session_index = session;
        memory_.session_index = session + 1;
        return outcome;
    }

    std::vector<std::size_t> order(memory_.readings.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), split_rng);
    const auto n_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(order.size())));

    fedlearn::Dataset train;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const LabeledReading& r = memory_.readings[order[k]];
        fedlearn::Sample s{scaler.featurize(r.reading.gases), static_cast<std::size_t>(r.label)};
        if (k < n_test)
            outcome.held_out.push_back(std::move(s));
        else
            train.push_back(std::move(s));
    }

    outcome.update = fedlearn::local_train(global, train, train_cfg, train_rng, cfg_.robot_id, session);
    // n_i counts the samples available to this robot, not just the split
    // the optimizer consumed.
    outcome.update.n_samples = memory_.readings.size();
    outcome.train_duration_s = static_cast<double>(train.size() * train_cfg.epochs) /
                               cfg_.train_rate_samples_per_s;

    memory_.readings.clear();
    memory_.session_index = session + 1;
    return outcome;
}

void Robot::depart(const fedlearn::ModelWeights& global) {
    if (phase_ != Phase::Charging)
        throw InvalidStateError("depart: robot is not docked");
    if (battery_.level < kLeaveDockThreshold)
        throw InvalidStateError("depart: battery below the leave threshold");
    model_ = global;
    phase_ = Phase::Scanning;
    returning_ = false;
    next_waypoint_ = 0;
    plan_forward_ = true;
    // The robot walks from the dock to the plan start; with the default
    // dock at the first waypoint this leg has zero length.
}

}  // namespace nppsim::robot
