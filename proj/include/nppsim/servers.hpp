#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "nppsim/chacha.hpp"
#include "nppsim/config.hpp"
#include "nppsim/fedlearn.hpp"
#include "nppsim/qkd.hpp"
#include "nppsim/rng.hpp"

namespace nppsim::servers {

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LocalLogEntry {
    double receive_time_s = 0.0;
    std::uint32_t robot_id = 0;
    chacha::TelemetryRecord record;
    std::uint64_t report_hash = 0;
    bool ack_sent = false;
};

struct Ack {
    std::uint32_t robot_id = 0;
    std::uint64_t report_hash = 0;
};

/// Per-plant receiver: decrypts telemetry frames, logs them, acknowledges.
/// Duplicate retransmissions collapse to a single log entry but are
/// re-acknowledged.
class LocalServer {
  public:
    explicit LocalServer(std::uint32_t plant_id) : plant_id_(plant_id) {}

    // Session key provisioning stands in for an out-of-band step.
    void provision_key(std::uint32_t robot_id, const std::array<std::uint8_t, 32>& key);

    // Nack (= nullopt) on malformed frames; nothing is logged for them.
    std::optional<Ack> receive(std::uint32_t robot_id, std::span<const std::uint8_t> wire, double now_s);

    const std::vector<LocalLogEntry>& log() const { return log_; }
    std::uint32_t plant_id() const { return plant_id_; }

  private:
    std::uint32_t plant_id_;
    std::map<std::uint32_t, std::array<std::uint8_t, 32>> keys_;
    std::set<std::uint64_t> seen_hashes_;
    std::vector<LocalLogEntry> log_;
};

// LocalUpdate wire format inside the QKD-protected channel:
// robot_id(4) | session_index(4) | n_samples(8) | weights blob, all LE.
std::vector<std::uint8_t> serialize_update(const fedlearn::LocalUpdate& update);
fedlearn::LocalUpdate deserialize_update(std::span<const std::uint8_t> bytes);

struct TransferAttempt {
    double qber = 0.0;
    std::size_t sifted_bits = 0;
    qkd::GateDecision gate = qkd::GateDecision::Abort;
};

struct TransferOutcome {
    bool delivered = false;
    std::vector<TransferAttempt> attempts;
    std::size_t message_bytes = 0;
    double eve_information_bits = 0.0;  // from the final attempt
};

/// Cross-plant aggregator. Holds the current global model and the
/// gate-accepted updates for the round in flight.
class GlobalServer {
  public:
    GlobalServer(std::size_t classes, std::size_t features)
        : global_(fedlearn::ModelWeights::zeros(classes, features)) {}

    void submit(fedlearn::LocalUpdate update) { pending_.push_back(std::move(update)); }

    // FedAvg over this round's accepted updates. Returns false (round
    // skipped, model unchanged) when no update carries samples.
    bool aggregate();

    const fedlearn::ModelWeights& global() const { return global_; }
    const std::vector<fedlearn::LocalUpdate>& pending() const { return pending_; }

  private:
    fedlearn::ModelWeights global_;
    std::vector<fedlearn::LocalUpdate> pending_;
};

// Runs BB84 key establishment and, on gate acceptance, ships the encrypted
// update to the global server. Retries fresh exchanges on aborts up to
// max_attempts, then reports the update as dropped. Delivered payloads are
// checked bitwise against the sender's weights.
TransferOutcome global_exchange(const fedlearn::LocalUpdate& update, GlobalServer& server,
                                const config::QkdParams& params, Rng& rng);

}  // namespace nppsim::servers
