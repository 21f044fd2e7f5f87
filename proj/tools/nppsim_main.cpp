// Command-line front end: simulate | report | qkd-demo | crypto-vectors.
// Exit codes: 0 success, 2 configuration error, 3 runtime invariant violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nppsim/chacha.hpp"
#include "nppsim/config.hpp"
#include "nppsim/qkd.hpp"
#include "nppsim/simulation.hpp"

namespace {

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir) {
    nppsim::config::SimConfig cfg =
        config_path.empty() ? nppsim::config::default_config() : nppsim::config::load_config(config_path);
    if (seed.has_value()) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();
    nppsim::sim::check_output_dir(cfg.output_dir);

    const auto report = nppsim::sim::run_simulation(cfg);
    nppsim::sim::emit_report(report, cfg.output_dir);

    std::size_t delivered = 0, attempts = 0;
    for (const auto& round : report.rounds)
        for (const auto& r : round.robots) {
            attempts += r.attempts.size();
            if (r.delivered) ++delivered;
        }
    std::printf("simulated %zu sessions across %zu plants (sim time %.0f s)\n", report.rounds.size(),
                cfg.plants.size(), report.total_sim_time_s);
    std::printf("transfers delivered: %zu, qkd exchanges: %zu\n", delivered, attempts);
    std::printf("outputs written to %s\n", cfg.output_dir.c_str());
    return 0;
}

int cmd_report(const std::string& in_dir) {
    const std::string table = nppsim::sim::render_table_from_dir(in_dir);
    std::ofstream out(std::filesystem::path(in_dir) / "table.txt", std::ios::binary);
    out << table;
    std::cout << table;
    return 0;
}

int cmd_qkd_demo(std::size_t n_qubits, const std::vector<double>& eve_fractions, std::uint64_t seed,
                 double abort_threshold) {
    std::printf("%-10s %-8s %-8s %-8s %-8s %-10s\n", "n_qubits", "eve", "sifted", "qber", "gate",
                "eve_info");
    for (double fraction : eve_fractions) {
        auto rng = nppsim::make_rng(nppsim::derive_seed(seed, nppsim::kStreamQkd,
                                                        static_cast<std::uint64_t>(fraction * 1e6)));
        nppsim::qkd::EvePolicy eve;
        eve.intercept_fraction = fraction;
        const auto result = nppsim::qkd::bb84_exchange(n_qubits, eve, 0.0, rng);
        const auto gate = nppsim::qkd::keygate(result.sacrificed, abort_threshold);
        const double info = nppsim::qkd::eve_information(result.alice_key, eve.records);
        const std::size_t sifted = result.alice_key.bits.size() + result.sacrificed_indices.size();
        std::printf("%-10zu %-8.3f %-8zu %-8.4f %-8s %-10.4f\n", n_qubits, fraction, sifted,
                    result.sacrificed.ratio, gate == nppsim::qkd::GateDecision::Accept ? "accept" : "abort",
                    info);
    }
    return 0;
}

int cmd_crypto_vectors() {
    using namespace nppsim::chacha;
    int failures = 0;
    auto check = [&failures](const char* name, bool ok) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
        if (!ok) ++failures;
    };

    std::array<std::uint8_t, 32> key;
    for (int i = 0; i < 32; ++i) key[i] = static_cast<std::uint8_t>(i);

    {
        const std::array<std::uint8_t, 12> nonce = {0, 0, 0, 9, 0, 0, 0, 0x4a, 0, 0, 0, 0};
        const auto block = chacha20_block(key, 1, nonce);
        static const std::uint8_t expect[64] = {
            0x10, 0xf1, 0xe7, 0xe4, 0xd1, 0x3b, 0x59, 0x15, 0x50, 0x0f, 0xdd, 0x1f, 0xa3, 0x20, 0x71, 0xc4,
            0xc7, 0xd1, 0xf4, 0xc7, 0x33, 0xc0, 0x68, 0x03, 0x04, 0x22, 0xaa, 0x9a, 0xc3, 0xd4, 0x6c, 0x4e,
            0xd2, 0x82, 0x64, 0x46, 0x07, 0x9f, 0xaa, 0x09, 0x14, 0xc2, 0xd7, 0x05, 0xd9, 0x8b, 0x02, 0xa2,
            0xb5, 0x12, 0x9c, 0xd1, 0xde, 0x16, 0x4e, 0xb9, 0xcb, 0xd0, 0x83, 0xe8, 0xa2, 0x50, 0x3c, 0x4e};
        check("block function vector", std::equal(block.begin(), block.end(), expect));
    }
    {
        const std::array<std::uint8_t, 12> nonce = {0, 0, 0, 0, 0, 0, 0, 0x4a, 0, 0, 0, 0};
        const char* text =
            "Ladies and Gentlemen of the class of '99: If I could offer you "
            "only one tip for the future, sunscreen would be it.";
        ChaChaKey k{key, nonce, 1};
        const auto frame =
            encrypt(k, std::span(reinterpret_cast<const std::uint8_t*>(text), 114));
        static const std::uint8_t expect_head[16] = {0x6e, 0x2e, 0x35, 0x9a, 0x25, 0x68, 0xf9, 0x80,
                                                     0x41, 0xba, 0x07, 0x28, 0xdd, 0x0d, 0x69, 0x81};
        const bool head_ok = std::equal(std::begin(expect_head), std::end(expect_head),
                                        frame.ciphertext.begin());
        const bool tail_ok = frame.ciphertext.size() == 114 && frame.ciphertext[112] == 0x87 &&
                             frame.ciphertext[113] == 0x4d;
        check("encryption vector", head_ok && tail_ok);
        const auto round_trip = decrypt(k, frame);
        check("decryption round trip",
              std::equal(round_trip.begin(), round_trip.end(),
                         reinterpret_cast<const std::uint8_t*>(text)));
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robot fleet contamination-monitoring simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, in_dir;
    std::optional<std::uint64_t> seed_override;
    std::uint64_t demo_seed = 1;
    std::size_t n_qubits = 20000;
    std::vector<double> eve_fractions{0.0};
    double abort_threshold = 0.11;

    auto* simulate = app.add_subcommand("simulate", "run the full multi-session experiment");
    simulate->add_option("--config", config_path, "JSON config file (defaults built in)");
    simulate->add_option("--seed", seed_override, "override the master seed");
    simulate->add_option("--out", out_dir, "output directory");

    auto* report = app.add_subcommand("report", "re-render table.txt from persisted metrics CSVs");
    report->add_option("--in", in_dir, "run output directory")->required();

    auto* qkd_demo = app.add_subcommand("qkd-demo", "one BB84 exchange per eavesdropper fraction");
    qkd_demo->add_option("--n-qubits", n_qubits, "qubits per exchange");
    qkd_demo->add_option("--eve", eve_fractions, "eavesdropper intercept fraction(s)");
    qkd_demo->add_option("--seed", demo_seed, "rng seed");
    qkd_demo->add_option("--abort-threshold", abort_threshold, "QBER abort threshold");

    app.add_subcommand("crypto-vectors", "check the cipher against published test vectors");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, seed_override, out_dir);
        if (report->parsed()) return cmd_report(in_dir);
        if (qkd_demo->parsed()) return cmd_qkd_demo(n_qubits, eve_fractions, demo_seed, abort_threshold);
        return cmd_crypto_vectors();
    } catch (const nppsim::config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nppsim::sim::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
