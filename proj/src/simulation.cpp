#include "nppsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "nppsim/chacha.hpp"
#include "nppsim/robot.hpp"

namespace nppsim::sim {

namespace {

using config::SimConfig;
using coverage::GeoPoint;
using coverage::LocalFrame;
using envsim::GasField;
using envsim::ScenarioSpec;

struct RobotRuntime {
    robot::Robot machine;
    std::uint32_t plant_id = 0;
    // Session-scoped state, reset each round.
    double dock_time_s = 0.0;
    double upload_time_s = 0.0;
    RobotRoundStats stats;
    fedlearn::Dataset held_out;
    robot::ChargeOutcome charge;

    explicit RobotRuntime(robot::RobotConfig cfg) : machine(std::move(cfg)) {}
};

struct PlantRuntime {
    std::uint32_t plant_id = 0;
    LocalFrame frame;  // plant-wide frame covering all robot boxes
    servers::LocalServer local_server;
    std::vector<std::size_t> robot_indices;  // into the flat robot list
    fedlearn::Dataset validation;
    std::vector<Event> events;

    explicit PlantRuntime(std::uint32_t id) : plant_id(id), local_server(id) {}
};

ScenarioSpec scenario_spec(const config::ScenarioParams& params, const LocalFrame& frame) {
    ScenarioSpec spec;
    spec.width_m = frame.width_m;
    spec.length_m = frame.length_m;
    spec.min_hotspots = params.min_hotspots;
    spec.max_hotspots = params.max_hotspots;
    spec.radius_m = params.radius_m;
    spec.onset_s = params.onset_s;
    spec.co2_amplitude_ppm = params.co2_amplitude_ppm;
    spec.co_amplitude_ppm = params.co_amplitude_ppm;
    spec.ch4_amplitude_ppm = params.ch4_amplitude_ppm;
    spec.class_mix = params.class_mix;
    spec.background = params.background;
    spec.noise_sd = params.noise_sd;
    return spec;
}

// Uniform labeled samples over the plant area from a dedicated field,
// used to monitor global-loss convergence on data that never changes.
fedlearn::Dataset make_validation_set(const ScenarioSpec& spec, const fedlearn::FeatureScaler& scaler,
                                      Rng& rng) {
    const GasField field = envsim::generate_scenario(spec, rng);
    fedlearn::Dataset out;
    const std::size_t kSamples = 800;
    const LocalFrame frame{GeoPoint{0.0, 0.0}, spec.width_m, spec.length_m};
    std::uniform_real_distribution<double> ux(0.0, spec.width_m);
    std::uniform_real_distribution<double> uy(0.0, spec.length_m);
    for (std::size_t i = 0; i < kSamples; ++i) {
        const Vec2 pos{ux(rng), uy(rng)};
        const auto reading = envsim::sample(field, frame, pos, 0.0, rng);
        const auto label = envsim::true_class(field, pos, 0.0);
        out.push_back({scaler.featurize(reading.gases), static_cast<std::size_t>(label)});
    }
    return out;
}

std::array<std::uint8_t, 32> random_key(Rng& rng) {
    std::array<std::uint8_t, 32> key{};
    for (auto& b : key) b = static_cast<std::uint8_t>(rng() & 0xffu);
    return key;
}

bool bernoulli(double p, Rng& rng) {
    if (p <= 0.0) return false;
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(rng) < p;
}

chacha::TelemetryRecord record_from_report(const robot::ContaminationReport& report) {
    chacha::TelemetryRecord record;
    record.lat = report.location.lat;
    record.lon = report.location.lon;
    record.co2_ppm = report.gases.co2_ppm;
    record.co_ppm = report.gases.co_ppm;
    record.ch4_ppm = report.gases.ch4_ppm;
    record.timestamp_ms = static_cast<std::uint64_t>(std::llround(report.timestamp_s * 1000.0));
    return record;
}

void check_position_in_box(const RobotRuntime& rt) {
    const Vec2 p = rt.machine.position();
    const auto& cfg = rt.machine.config();
    const double eps = 1e-9;
    if (p.x < -eps || p.x > cfg.box_width_m + eps || p.y < -eps || p.y > cfg.box_length_m + eps)
        throw InvariantViolation("robot left its bounding box");
}

// Critical-state round trip over the lossy channel: transmit, await ack,
// retransmit the identical frame on timeout. Returns the ack time.
double deliver_report(RobotRuntime& rt, PlantRuntime& plant, const SimConfig& cfg,
                      chacha::SessionCipher& cipher, double reading_time_s, Rng& fault_rng) {
    const auto& report = rt.machine.pending_report();
    if (!report.has_value()) throw InvariantViolation("critical state without a pending report");

    const auto plaintext = chacha::encode_record(record_from_report(*report));
    const auto hash = chacha::fnv1a64(plaintext);
    const auto frame_bytes = cipher.encrypt(plaintext).to_bytes();
    const std::uint32_t robot_id = rt.machine.config().robot_id;
    const double latency = cfg.network.report_latency_s;

    for (std::size_t attempt = 0;; ++attempt) {
        if (attempt >= 100000)
            throw InvariantViolation("report delivery failed to converge; drop probability too high");
        const double t_send = reading_time_s + static_cast<double>(attempt) * cfg.network.ack_timeout_s;
        char detail[96];
        std::snprintf(detail, sizeof detail, "hash=%016llx attempt=%zu",
                      static_cast<unsigned long long>(hash), attempt + 1);
        plant.events.push_back({t_send, robot_id, EventKind::ReportSent, detail});

        if (bernoulli(cfg.network.report_drop_prob, fault_rng)) continue;  // frame lost
        const auto ack = plant.local_server.receive(robot_id, frame_bytes, t_send + latency);
        if (!ack.has_value()) continue;  // malformed; treated like a loss
        if (ack->report_hash != hash) throw InvariantViolation("ack hash does not match the report");
        if (bernoulli(cfg.network.report_drop_prob, fault_rng)) continue;  // ack lost

        const double t_ack = t_send + 2.0 * latency;
        std::snprintf(detail, sizeof detail, "hash=%016llx", static_cast<unsigned long long>(hash));
        plant.events.push_back({t_ack, robot_id, EventKind::AckReceived, detail});
        return t_ack;
    }
}

// Scan phase of one session: tick until the robot docks. Returns dock time.
double run_scan_phase(RobotRuntime& rt, PlantRuntime& plant, const GasField& field,
                      const SimConfig& cfg, double session_start_s, Rng& noise_rng, Rng& fault_rng,
                      chacha::SessionCipher& cipher) {
    const double dt = 1.0 / rt.machine.config().cadence_hz;
    const double drain_floor = rt.machine.config().battery.drain_per_second;
    const double max_span = 2.0 / drain_floor + 86400.0;  // idle drain alone must dock well before this
    double t = session_start_s;

    while (rt.machine.phase() != robot::Phase::Charging) {
        if (t - session_start_s > max_span)
            throw InvariantViolation("robot never reached the charging dock");
        t += dt;
        auto events = rt.machine.step(field, dt, t, noise_rng);
        plant.events.insert(plant.events.end(), events.begin(), events.end());
        check_position_in_box(rt);

        if (rt.machine.phase() == robot::Phase::Critical) {
            const double t_ack = deliver_report(rt, plant, cfg, cipher, t, fault_rng);
            auto resume_events = rt.machine.acknowledge(t_ack - t, t_ack);
            plant.events.insert(plant.events.end(), resume_events.begin(), resume_events.end());
            t = t_ack;
        }
    }
    return t;
}

void sort_events(std::vector<Event>& events) {
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.time_s != b.time_s) return a.time_s < b.time_s;
        if (a.robot_id != b.robot_id) return a.robot_id < b.robot_id;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
}

// On a mid-run invariant violation the collected events go to a dump file
// so the failure can be reconstructed.
void dump_events_on_abort(const std::vector<PlantRuntime>& plants, const std::string& output_dir) {
    try {
        std::filesystem::create_directories(output_dir);
        std::ofstream dump(std::filesystem::path(output_dir) / "events_dump.log", std::ios::binary);
        char buf[64];
        for (const auto& plant : plants) {
            for (const Event& e : plant.events) {
                std::snprintf(buf, sizeof buf, "%.3f,%u,", e.time_s, e.robot_id);
                dump << "plant" << plant.plant_id << "," << buf << event_kind_name(e.kind) << ","
                     << e.detail << "\n";
            }
        }
    } catch (...) {
        // the original violation matters more than a failed dump
    }
}

}  // namespace

SimulationReport run_simulation(const SimConfig& cfg) {
    cfg.validate();

    SimulationReport report;
    report.effective_config = cfg;

    // --- Build plants and robots -------------------------------------------
    std::vector<PlantRuntime> plants;
    std::vector<RobotRuntime> robots;
    for (const auto& plant_spec : cfg.plants) {
        PlantRuntime plant(plant_spec.plant_id);

        double sw_lat = 90.0, sw_lon = 180.0, ne_lat = -90.0, ne_lon = -180.0;
        for (const auto& rs : plant_spec.robots) {
            sw_lat = std::min(sw_lat, rs.sw_lat);
            sw_lon = std::min(sw_lon, rs.sw_lon);
            ne_lat = std::max(ne_lat, rs.ne_lat);
            ne_lon = std::max(ne_lon, rs.ne_lon);
        }
        plant.frame = LocalFrame::from_box(
            coverage::GeoBoundingBox(GeoPoint(sw_lat, sw_lon), GeoPoint(ne_lat, ne_lon)));

        for (const auto& rs : plant_spec.robots) {
            const auto box = rs.box();
            const auto box_frame = LocalFrame::from_box(box);
            robot::RobotConfig rc;
            rc.robot_id = rs.robot_id;
            rc.frame = plant.frame;
            rc.plant_offset = {
                coverage::geo_distance(plant.frame.origin, GeoPoint(plant.frame.origin.lat, rs.sw_lon)),
                coverage::geo_distance(plant.frame.origin, GeoPoint(rs.sw_lat, plant.frame.origin.lon))};
            rc.box_width_m = box_frame.width_m;
            rc.box_length_m = box_frame.length_m;
            rc.plan = coverage::plan_lawnmower(box_frame, rs.strip_width_m, rs.orientation);
            rc.dock = rs.dock;
            rc.speed_mps = rs.speed_mps;
            rc.cadence_hz = rs.cadence_hz;
            rc.thresholds = rs.thresholds.value_or(cfg.thresholds.static_thresholds);
            rc.battery = rs.battery;
            rc.train_rate_samples_per_s = rs.train_rate_samples_per_s;
            plant.robot_indices.push_back(robots.size());
            robots.emplace_back(std::move(rc));
            robots.back().plant_id = plant_spec.plant_id;
        }

        auto validation_rng =
            make_rng(derive_seed(cfg.seed, plant_spec.plant_id, 0, kStreamValidation));
        plant.validation =
            make_validation_set(scenario_spec(plant_spec.scenario, plant.frame), cfg.learning.scaler,
                                validation_rng);
        plants.push_back(std::move(plant));
    }

    // One static contamination layout per plant for the whole run; hotspots
    // never move once active, so sessions sample a stationary distribution.
    std::vector<GasField> fields;
    for (std::size_t p = 0; p < plants.size(); ++p) {
        auto rng = make_rng(derive_seed(cfg.seed, plants[p].plant_id, kStreamScenario));
        fields.push_back(
            envsim::generate_scenario(scenario_spec(cfg.plants[p].scenario, plants[p].frame), rng));
    }

    servers::GlobalServer global_server(envsim::kNumClasses, fedlearn::FeatureScaler::kFeatures);
    double session_start_s = 0.0;

    // --- Session loop -------------------------------------------------------
    try {
    for (std::uint32_t session = 1; session <= cfg.sessions; ++session) {
        double round_upload_deadline = session_start_s;
        for (std::size_t p = 0; p < plants.size(); ++p) {
            PlantRuntime& plant = plants[p];
            for (std::size_t idx : plant.robot_indices) {
                RobotRuntime& rt = robots[idx];
                const std::uint32_t rid = rt.machine.config().robot_id;
                rt.stats = RobotRoundStats{};
                rt.stats.robot_id = rid;

                auto noise_rng = make_rng(derive_seed(cfg.seed, plant.plant_id, rid, session, kStreamSensorNoise));
                auto fault_rng = make_rng(derive_seed(cfg.seed, plant.plant_id, rid, session, kStreamFault));
                auto cipher_rng = make_rng(derive_seed(cfg.seed, plant.plant_id, rid, session, kStreamCipher));

                // Per-session telemetry key, shared with the plant's server.
                const auto session_key = random_key(cipher_rng);
                plant.local_server.provision_key(rid, session_key);
                chacha::SessionCipher cipher(session_key, rid);

                rt.dock_time_s = run_scan_phase(rt, plant, fields[p], cfg, session_start_s, noise_rng,
                                                fault_rng, cipher);

                auto split_rng = make_rng(derive_seed(cfg.seed, plant.plant_id, rid, session, kStreamSplit));
                auto train_rng = make_rng(derive_seed(cfg.seed, plant.plant_id, rid, session, kStreamTrain));
                const double time_to_full = rt.machine.seconds_to_full_charge();
                rt.charge = rt.machine.charging_cycle(rt.machine.model(), cfg.learning.train,
                                                      cfg.learning.scaler, cfg.learning.test_fraction,
                                                      split_rng, train_rng);
                rt.held_out = rt.charge.held_out;

                const double train_done_s = rt.dock_time_s + rt.charge.train_duration_s;
                char detail[96];
                std::snprintf(detail, sizeof detail, "n=%zu duration=%.1fs",
                              rt.charge.update.n_samples, rt.charge.train_duration_s);
                plant.events.push_back({train_done_s, rid, EventKind::TrainDone, detail});

                // Leaves the charger only when trained AND full.
                const double ready_s = std::max(train_done_s, rt.dock_time_s + time_to_full);
                rt.machine.set_battery_level(1.0);

                auto qkd_rng = make_rng(derive_seed(cfg.seed, plant.plant_id, rid, session, kStreamQkd));
                const auto outcome = servers::global_exchange(rt.charge.update, global_server, cfg.qkd, qkd_rng);
                rt.stats.n_samples = rt.charge.update.n_samples;
                rt.stats.message_bytes = outcome.message_bytes;
                rt.stats.delivered = outcome.delivered;
                rt.stats.attempts = outcome.attempts;

                rt.upload_time_s = ready_s + static_cast<double>(outcome.attempts.size()) * cfg.qkd.latency_s;
                std::snprintf(detail, sizeof detail, "%s bytes=%zu attempts=%zu qber=%.4f",
                              outcome.delivered ? "delivered" : "dropped", outcome.message_bytes,
                              outcome.attempts.size(), outcome.attempts.back().qber);
                plant.events.push_back({rt.upload_time_s, rid, EventKind::WeightsUploaded, detail});
                round_upload_deadline = std::max(round_upload_deadline, rt.upload_time_s);
            }
        }

        // --- Synchronous aggregation over the gate-accepted updates --------
        const std::uint64_t version_before = global_server.global().version;
        const auto accepted = global_server.pending();
        const bool aggregated = global_server.aggregate();
        if (aggregated) {
            if (global_server.global().version != version_before + 1)
                throw InvariantViolation("global model version did not advance by one");
            // Recompute from the persisted updates; must match bitwise.
            fedlearn::ModelWeights check = fedlearn::fedavg(accepted);
            if (check.values != global_server.global().values)
                throw InvariantViolation("aggregated weights do not match recomputation");
        }

        const double install_s = round_upload_deadline + cfg.qkd.latency_s;
        for (std::size_t p = 0; p < plants.size(); ++p) {
            for (std::size_t idx : plants[p].robot_indices) {
                RobotRuntime& rt = robots[idx];
                char detail[64];
                std::snprintf(detail, sizeof detail, "version=%llu",
                              static_cast<unsigned long long>(global_server.global().version));
                plants[p].events.push_back(
                    {install_s, rt.machine.config().robot_id, EventKind::GlobalModelInstalled, detail});
                rt.machine.depart(global_server.global());
            }
        }

        // --- Round record ---------------------------------------------------
        RoundRecord round;
        round.session_index = session;
        round.aggregated = aggregated;
        round.model_version = global_server.global().version;
        std::vector<fedlearn::Dataset> validation_sets;
        for (const auto& plant : plants) validation_sets.push_back(plant.validation);
        round.validation_loss = fedlearn::global_loss(global_server.global(), validation_sets);

        for (std::size_t p = 0; p < plants.size(); ++p) {
            PlantRoundMetrics pm;
            pm.plant_id = plants[p].plant_id;
            fedlearn::Dataset plant_test;
            for (std::size_t idx : plants[p].robot_indices) {
                plant_test.insert(plant_test.end(), robots[idx].held_out.begin(),
                                  robots[idx].held_out.end());
                round.robots.push_back(robots[idx].stats);
            }
            pm.test_samples = plant_test.size();
            if (!plant_test.empty()) pm.metrics = fedlearn::evaluate(global_server.global(), plant_test);
            round.per_plant.push_back(std::move(pm));
        }
        report.rounds.push_back(std::move(round));

        // Experimental collective thresholds: pool this session's raw reading
        // statistics across every robot and set next session's per-gas
        // threshold at mean + k*sd.
        if (cfg.thresholds.collective) {
            std::size_t n = 0;
            std::array<double, 3> sum{0, 0, 0}, sum_sq{0, 0, 0};
            for (const auto& rt : robots) {
                n += rt.charge.n_readings;
                for (int g = 0; g < 3; ++g) {
                    sum[g] += rt.charge.gas_sum[g];
                    sum_sq[g] += rt.charge.gas_sum_sq[g];
                }
            }
            if (n > 1) {
                envsim::GasVector next;
                double* out[3] = {&next.co2_ppm, &next.co_ppm, &next.ch4_ppm};
                for (int g = 0; g < 3; ++g) {
                    const double mean = sum[g] / static_cast<double>(n);
                    const double var = std::max(0.0, sum_sq[g] / static_cast<double>(n) - mean * mean);
                    *out[g] = std::max(1.0, mean + cfg.thresholds.collective_sd_multiplier * std::sqrt(var));
                }
                for (auto& rt : robots) rt.machine.set_thresholds(next);
            }
        }

        session_start_s = install_s;
    }
    } catch (const InvariantViolation&) {
        dump_events_on_abort(plants, cfg.output_dir);
        throw;
    }

    for (auto& plant : plants) {
        sort_events(plant.events);
        report.plant_events.push_back(std::move(plant.events));
        auto log = plant.local_server.log();
        std::stable_sort(log.begin(), log.end(),
                         [](const servers::LocalLogEntry& a, const servers::LocalLogEntry& b) {
                             if (a.receive_time_s != b.receive_time_s)
                                 return a.receive_time_s < b.receive_time_s;
                             return a.robot_id < b.robot_id;
                         });
        report.local_logs.push_back(std::move(log));
    }
    report.final_model = global_server.global();
    report.total_sim_time_s = session_start_s;
    return report;
}

}  // namespace nppsim::sim
