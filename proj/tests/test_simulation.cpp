#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "nppsim/simulation.hpp"

using namespace nppsim;
using namespace nppsim::sim;

namespace fs = std::filesystem;

namespace {

// A one-plant, two-robot, few-session setup that runs in well under a second.
config::SimConfig small_config(std::size_t sessions = 2, std::size_t robots = 2) {
    auto cfg = config::default_config();
    cfg.sessions = sessions;
    cfg.plants.resize(1);
    cfg.plants[0].robots.resize(robots);
    cfg.qkd.n_qubits = 16384;  // the 344-byte update needs ~2752 pad bits
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("degenerate run: one robot, one session, clean field") {
    auto cfg = small_config(1, 1);
    cfg.plants[0].scenario.min_hotspots = 0;
    cfg.plants[0].scenario.max_hotspots = 0;
    const auto report = run_simulation(cfg);

    REQUIRE(report.rounds.size() == 1);
    CHECK(report.rounds[0].aggregated);
    CHECK(report.rounds[0].model_version == 1);

    // a clean field never crosses a threshold
    for (const auto& e : report.plant_events[0]) {
        CHECK(e.kind != EventKind::ThresholdExceeded);
        CHECK(e.kind != EventKind::ReportSent);
    }
    CHECK(report.local_logs[0].empty());

    TempDir dir("nppsim_test_degenerate");
    emit_report(report, dir.path.string());
    CHECK(fs::exists(dir.path / "metrics_plant1.csv"));
    CHECK(fs::exists(dir.path / "events_plant1.log"));
    CHECK(fs::exists(dir.path / "table.txt"));
    CHECK(fs::exists(dir.path / "manifest"));
}

TEST_CASE("session lifecycle invariants hold on a small run") {
    auto cfg = small_config(3, 2);
    const auto report = run_simulation(cfg);
    REQUIRE(report.rounds.size() == 3);

    SUBCASE("model version advances once per aggregated session") {
        std::uint64_t version = 0;
        for (const auto& round : report.rounds) {
            if (round.aggregated) CHECK(round.model_version == version + 1);
            version = round.model_version;
        }
    }
    SUBCASE("every session yields one update per robot") {
        for (const auto& round : report.rounds) {
            CHECK(round.robots.size() == 2);
            for (const auto& r : round.robots) {
                CHECK(r.delivered);
                CHECK(r.n_samples > 0);
                CHECK(r.attempts.size() == 1);
            }
        }
    }
    SUBCASE("every ReportSent hash eventually gets exactly one AckReceived") {
        std::map<std::string, int> sent, acked;
        for (const auto& e : report.plant_events[0]) {
            const auto hash = e.detail.substr(0, e.detail.find(' '));
            if (e.kind == EventKind::ReportSent) sent[hash]++;
            if (e.kind == EventKind::AckReceived) acked[hash]++;
        }
        for (const auto& [hash, n] : sent) {
            CHECK(acked.count(hash) == 1);
            CHECK(acked[hash] == 1);
        }
    }
    SUBCASE("event log is totally ordered") {
        const auto& events = report.plant_events[0];
        for (std::size_t i = 1; i < events.size(); ++i) {
            const auto& a = events[i - 1];
            const auto& b = events[i];
            const bool ordered = a.time_s < b.time_s ||
                                 (a.time_s == b.time_s && a.robot_id < b.robot_id) ||
                                 (a.time_s == b.time_s && a.robot_id == b.robot_id &&
                                  static_cast<int>(a.kind) <= static_cast<int>(b.kind));
            CHECK(ordered);
        }
    }
    SUBCASE("local log entries are acked and time-ordered") {
        for (const auto& entry : report.local_logs[0]) CHECK(entry.ack_sent);
        for (std::size_t i = 1; i < report.local_logs[0].size(); ++i)
            CHECK(report.local_logs[0][i - 1].receive_time_s <= report.local_logs[0][i].receive_time_s);
    }
}

TEST_CASE("determinism: same seed, same bytes; different seed, different readings") {
    auto cfg = small_config(2, 2);
    TempDir dir_a("nppsim_det_a"), dir_b("nppsim_det_b"), dir_c("nppsim_det_c");

    emit_report(run_simulation(cfg), dir_a.path.string());
    emit_report(run_simulation(cfg), dir_b.path.string());
    CHECK(slurp(dir_a.path / "metrics_plant1.csv") == slurp(dir_b.path / "metrics_plant1.csv"));
    CHECK(slurp(dir_a.path / "events_plant1.log") == slurp(dir_b.path / "events_plant1.log"));
    CHECK(slurp(dir_a.path / "table.txt") == slurp(dir_b.path / "table.txt"));
    CHECK(slurp(dir_a.path / "manifest") == slurp(dir_b.path / "manifest"));

    cfg.seed += 1;
    emit_report(run_simulation(cfg), dir_c.path.string());
    CHECK(slurp(dir_a.path / "events_plant1.log") != slurp(dir_c.path / "events_plant1.log"));
}

TEST_CASE("report re-render reproduces table.txt byte for byte") {
    auto cfg = small_config(2, 1);
    TempDir dir("nppsim_rerender");
    emit_report(run_simulation(cfg), dir.path.string());
    const auto originally = slurp(dir.path / "table.txt");
    CHECK(render_table_from_dir(dir.path.string()) == originally);
}

TEST_CASE("fault injection: reports retry until acknowledged, single log entry per hash") {
    auto cfg = small_config(1, 1);
    cfg.network.report_drop_prob = 0.5;
    const auto report = run_simulation(cfg);

    std::size_t sends = 0, acks = 0;
    std::set<std::string> hashes;
    for (const auto& e : report.plant_events[0]) {
        if (e.kind == EventKind::ReportSent) {
            ++sends;
            hashes.insert(e.detail.substr(0, e.detail.find(' ')));
        }
        if (e.kind == EventKind::AckReceived) ++acks;
    }
    REQUIRE(acks > 0);
    CHECK(acks == hashes.size());      // exactly one ack per distinct report
    CHECK(sends > acks);               // with 50% loss some retransmissions must happen
    CHECK(report.local_logs[0].size() == hashes.size());
}

TEST_CASE("full interception drops every upload and skips every round") {
    auto cfg = small_config(2, 1);
    cfg.qkd.eve_fraction = 1.0;
    const auto report = run_simulation(cfg);
    for (const auto& round : report.rounds) {
        CHECK_FALSE(round.aggregated);
        CHECK(round.model_version == 0);
        for (const auto& r : round.robots) {
            CHECK_FALSE(r.delivered);
            CHECK(r.attempts.size() == cfg.qkd.max_attempts);
        }
    }
}

TEST_CASE("collective threshold mode stays deterministic and keeps running") {
    auto cfg = small_config(2, 1);
    cfg.thresholds.collective = true;
    const auto a = run_simulation(cfg);
    const auto b = run_simulation(cfg);
    REQUIRE(a.rounds.size() == 2);
    CHECK(a.plant_events[0].size() == b.plant_events[0].size());
}

TEST_CASE("global validation loss decreases across rounds on the default scenario") {
    const auto report = run_simulation(config::default_config());
    REQUIRE(report.rounds.size() == 30);
    int non_increasing = 0;
    for (std::size_t i = 1; i < report.rounds.size(); ++i) {
        CHECK(std::isfinite(report.rounds[i].validation_loss));
        if (report.rounds[i].validation_loss <= report.rounds[i - 1].validation_loss) ++non_increasing;
    }
    CHECK(non_increasing >= 25);
}

TEST_CASE("emit_report refuses empty round lists") {
    SimulationReport empty;
    empty.effective_config = config::default_config();
    TempDir dir("nppsim_empty");
    CHECK_THROWS_AS(emit_report(empty, dir.path.string()), std::invalid_argument);
}

TEST_CASE("a thirty-session table shows exactly the seven summary rows per plant") {
    std::vector<MetricsRow> rows;
    for (std::uint32_t plant = 1; plant <= 2; ++plant)
        for (std::uint32_t session = 1; session <= 30; ++session)
            rows.push_back({plant, session, 0.5, 0.5, 0.5, 0.5, 0.99});
    const std::string table = render_table(rows);
    std::size_t session_rows = 0;
    std::istringstream lines(table);
    std::string line;
    while (std::getline(lines, line))
        if (line.rfind("Session ", 0) == 0) ++session_rows;
    CHECK(session_rows == 14);  // 7 per plant
    CHECK(table.find("Session 15") != std::string::npos);
    CHECK(table.find("Session 2 ") == std::string::npos);
}

TEST_CASE("metrics csv round trips through the reader") {
    auto cfg = small_config(2, 2);
    const auto report = run_simulation(cfg);
    const auto rows = metrics_rows(report);
    TempDir dir("nppsim_csv");
    emit_report(report, dir.path.string());
    const auto back = read_metrics_csv((dir.path / "metrics_plant1.csv").string());
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].session == rows[i].session);
        // the CSV carries six decimals
        CHECK(std::abs(back[i].accuracy - rows[i].accuracy) <= 5e-7);
    }
}
