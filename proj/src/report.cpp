#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "nppsim/simulation.hpp"

namespace nppsim::sim {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "nppsim 0.1.0";

// Table 1-style row selection; shorter runs fall back to every session.
const std::uint32_t kTableSessions[] = {1, 5, 10, 15, 20, 25, 30};

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string format_metric(const std::optional<double>& v) {
    return v.has_value() ? format_metric(*v) : std::string("nan");
}

}  // namespace

std::vector<MetricsRow> metrics_rows(const SimulationReport& report) {
    std::vector<MetricsRow> rows;
    for (const RoundRecord& round : report.rounds) {
        for (const PlantRoundMetrics& pm : round.per_plant) {
            MetricsRow row;
            row.plant = pm.plant_id;
            row.session = round.session_index;
            if (pm.metrics.has_value()) {
                row.accuracy = pm.metrics->accuracy;
                row.f1 = pm.metrics->f1;
                row.precision = pm.metrics->precision;
                row.recall = pm.metrics->recall;
                row.roc_auc = pm.metrics->roc_auc;
            } else {
                row.accuracy = row.f1 = row.precision = row.recall =
                    std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows, std::uint32_t plant_id) {
    std::string out = "plant,session,accuracy,f1,precision,recall,roc_auc\n";
    for (const MetricsRow& row : rows) {
        if (row.plant != plant_id) continue;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%u,%u,", row.plant, row.session);
        out += buf;
        out += format_metric(row.accuracy) + "," + format_metric(row.f1) + "," +
               format_metric(row.precision) + "," + format_metric(row.recall) + "," +
               format_metric(row.roc_auc) + "\n";
    }
    return out;
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metrics file: " + path);
    std::vector<MetricsRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        MetricsRow row;
        char auc[32] = {0};
        const int n = std::sscanf(line.c_str(), "%u,%u,%lf,%lf,%lf,%lf,%31s", &row.plant, &row.session,
                                  &row.accuracy, &row.f1, &row.precision, &row.recall, auc);
        if (n != 7) throw std::runtime_error("malformed metrics row: " + line);
        if (std::string(auc) != "nan") row.roc_auc = std::stod(auc);
        rows.push_back(row);
    }
    return rows;
}

std::string render_table(const std::vector<MetricsRow>& rows) {
    std::map<std::uint32_t, std::vector<MetricsRow>> by_plant;
    for (const MetricsRow& row : rows) by_plant[row.plant].push_back(row);

    std::string out;
    for (auto& [plant, plant_rows] : by_plant) {
        std::sort(plant_rows.begin(), plant_rows.end(),
                  [](const MetricsRow& a, const MetricsRow& b) { return a.session < b.session; });
        std::vector<const MetricsRow*> selected;
        for (std::uint32_t s : kTableSessions)
            for (const MetricsRow& row : plant_rows)
                if (row.session == s) selected.push_back(&row);
        if (selected.empty())
            for (const MetricsRow& row : plant_rows) selected.push_back(&row);

        char buf[160];
        std::snprintf(buf, sizeof buf, "Plant %u\n", plant);
        out += buf;
        std::snprintf(buf, sizeof buf, "%-12s %-10s %-10s %-10s %-10s %-10s\n", "Run Name", "Accuracy",
                      "F1 Score", "Precision", "Recall", "ROC AUC");
        out += buf;
        for (const MetricsRow* row : selected) {
            char name[24];
            std::snprintf(name, sizeof name, "Session %u", row->session);
            std::snprintf(buf, sizeof buf, "%-12s %-10s %-10s %-10s %-10s %-10s\n", name,
                          format_metric(row->accuracy).c_str(), format_metric(row->f1).c_str(),
                          format_metric(row->precision).c_str(), format_metric(row->recall).c_str(),
                          format_metric(row->roc_auc).c_str());
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::string render_table_from_dir(const std::string& dir) {
    std::vector<fs::path> files;
    const std::regex pattern("metrics_plant([0-9]+)\\.csv");
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (std::regex_match(entry.path().filename().string(), pattern))
            files.push_back(entry.path());
    }
    if (files.empty()) throw std::runtime_error("no metrics_plant<k>.csv files in " + dir);
    std::sort(files.begin(), files.end());
    std::vector<MetricsRow> rows;
    for (const auto& f : files) {
        auto part = read_metrics_csv(f.string());
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return render_table(rows);
}

void check_output_dir(const std::string& output_dir) {
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw config::ConfigError("output dir not creatable: " + output_dir + ": " + ec.message());
    const fs::path probe = fs::path(output_dir) / ".write_probe";
    std::ofstream f(probe);
    if (!f) throw config::ConfigError("output dir not writable: " + output_dir);
    f.close();
    fs::remove(probe, ec);
}

void emit_report(const SimulationReport& report, const std::string& output_dir) {
    if (report.rounds.empty())
        throw std::invalid_argument("emit_report: no rounds; refusing to write partial outputs");
    check_output_dir(output_dir);
    const fs::path dir(output_dir);
    const auto rows = metrics_rows(report);

    for (std::size_t p = 0; p < report.effective_config.plants.size(); ++p) {
        const std::uint32_t plant_id = report.effective_config.plants[p].plant_id;

        std::ofstream csv(dir / ("metrics_plant" + std::to_string(plant_id) + ".csv"),
                          std::ios::binary);
        csv << metrics_csv(rows, plant_id);

        std::ofstream log(dir / ("events_plant" + std::to_string(plant_id) + ".log"),
                          std::ios::binary);
        char buf[64];
        for (const Event& e : report.plant_events[p]) {
            std::snprintf(buf, sizeof buf, "%.3f,%u,", e.time_s, e.robot_id);
            log << buf << event_kind_name(e.kind) << "," << e.detail << "\n";
        }
    }

    std::ofstream table(dir / "table.txt", std::ios::binary);
    table << render_table(rows);

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["seed"] = report.effective_config.seed;
    manifest["sessions"] = report.effective_config.sessions;
    manifest["total_sim_time_s"] = report.total_sim_time_s;
    manifest["config"] = nlohmann::json::parse(config::config_to_json(report.effective_config));
    std::ofstream mf(dir / "manifest", std::ios::binary);
    mf << manifest.dump(2) << "\n";
}

}  // namespace nppsim::sim
