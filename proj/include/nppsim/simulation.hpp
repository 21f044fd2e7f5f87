#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nppsim/config.hpp"
#include "nppsim/events.hpp"
#include "nppsim/fedlearn.hpp"
#include "nppsim/servers.hpp"

namespace nppsim::sim {

using servers::InvariantViolation;

struct RobotRoundStats {
    std::uint32_t robot_id = 0;
    std::size_t n_samples = 0;
    std::size_t message_bytes = 0;
    bool delivered = false;
    std::vector<servers::TransferAttempt> attempts;
};

struct PlantRoundMetrics {
    std::uint32_t plant_id = 0;
    std::size_t test_samples = 0;
    std::optional<fedlearn::SessionMetrics> metrics;  // absent when no held-out data
};

/// One synchronous federated round: per-robot transfer metadata, the
/// post-aggregation model version, and per-plant evaluation.
struct RoundRecord {
    std::uint32_t session_index = 0;
    bool aggregated = false;
    std::uint64_t model_version = 0;
    double validation_loss = 0.0;  // fixed validation sets, current global model
    std::vector<RobotRoundStats> robots;
    std::vector<PlantRoundMetrics> per_plant;
};

struct SimulationReport {
    config::SimConfig effective_config;
    std::vector<RoundRecord> rounds;
    std::vector<std::vector<Event>> plant_events;              // per plant, totally ordered
    std::vector<std::vector<servers::LocalLogEntry>> local_logs;  // per plant
    fedlearn::ModelWeights final_model;
    double total_sim_time_s = 0.0;
};

// The full experiment loop: for every session each robot downloads the
// global model, scans until its battery forces it back to the dock,
// trains while charging, uploads through the QKD-protected channel, and
// the global server aggregates and redistributes. Deterministic for a
// given config and seed.
SimulationReport run_simulation(const config::SimConfig& config);

/// One row of a per-plant metrics CSV.
struct MetricsRow {
    std::uint32_t plant = 0;
    std::uint32_t session = 0;
    double accuracy = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::optional<double> roc_auc;
};

std::vector<MetricsRow> metrics_rows(const SimulationReport& report);

// Writes metrics_plant<k>.csv, events_plant<k>.log, manifest, and
// table.txt into output_dir. Refuses to write anything for an empty run.
void emit_report(const SimulationReport& report, const std::string& output_dir);

// Preflight: output_dir is creatable and writable. Throws ConfigError.
void check_output_dir(const std::string& output_dir);

// Table rendering is a pure function of the rows so `report` can
// reproduce table.txt byte-for-byte from the persisted CSVs.
std::string render_table(const std::vector<MetricsRow>& rows);
std::string metrics_csv(const std::vector<MetricsRow>& rows, std::uint32_t plant_id);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

// Re-render table.txt from the CSVs persisted in a run directory.
std::string render_table_from_dir(const std::string& dir);

}  // namespace nppsim::sim
