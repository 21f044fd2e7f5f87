#include "nppsim/servers.hpp"

#include <cstring>

namespace nppsim::servers {

void LocalServer::provision_key(std::uint32_t robot_id, const std::array<std::uint8_t, 32>& key) {
    keys_[robot_id] = key;
}

std::optional<Ack> LocalServer::receive(std::uint32_t robot_id, std::span<const std::uint8_t> wire,
                                        double now_s) {
    const auto key_it = keys_.find(robot_id);
    if (key_it == keys_.end()) return std::nullopt;

    chacha::TelemetryRecord record;
    std::uint64_t hash = 0;
    try {
        const auto frame = chacha::CipherFrame::parse(wire);
        chacha::ChaChaKey key;
        key.key = key_it->second;
        const auto plaintext = chacha::decrypt(key, frame);
        record = chacha::decode_record(plaintext);
        hash = chacha::fnv1a64(plaintext);
    } catch (const chacha::EncodingError&) {
        return std::nullopt;  // Nack; the sender retries
    }

    if (seen_hashes_.insert(hash).second) {
        LocalLogEntry entry;
        entry.receive_time_s = now_s;
        entry.robot_id = robot_id;
        entry.record = record;
        entry.report_hash = hash;
        entry.ack_sent = true;
        log_.push_back(entry);
    }
    return Ack{robot_id, hash};
}

namespace {

void store_le32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
std::uint32_t load_le32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_update(const fedlearn::LocalUpdate& update) {
    const auto blob = fedlearn::serialize_weights(update.weights);
    std::vector<std::uint8_t> out(16 + blob.size());
    store_le32(out.data(), update.robot_id);
    store_le32(out.data() + 4, update.session_index);
    for (int i = 0; i < 8; ++i)
        out[8 + i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(update.n_samples) >> (8 * i));
    std::memcpy(out.data() + 16, blob.data(), blob.size());
    return out;
}

fedlearn::LocalUpdate deserialize_update(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16) throw std::invalid_argument("deserialize_update: truncated header");
    fedlearn::LocalUpdate update;
    update.robot_id = load_le32(bytes.data());
    update.session_index = load_le32(bytes.data() + 4);
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(bytes[8 + i]) << (8 * i);
    update.n_samples = static_cast<std::size_t>(n);
    update.weights = fedlearn::deserialize_weights(bytes.subspan(16));
    return update;
}

bool GlobalServer::aggregate() {
    bool any = false;
    for (const auto& u : pending_)
        if (u.n_samples > 0) any = true;
    if (!any) {
        pending_.clear();
        return false;
    }
    fedlearn::ModelWeights next = fedlearn::fedavg(pending_);
    next.version = global_.version + 1;
    global_ = std::move(next);
    pending_.clear();
    return true;
}

TransferOutcome global_exchange(const fedlearn::LocalUpdate& update, GlobalServer& server,
                                const config::QkdParams& params, Rng& rng) {
    const auto message = serialize_update(update);
    TransferOutcome outcome;
    outcome.message_bytes = message.size();

    for (std::size_t attempt = 0; attempt < params.max_attempts; ++attempt) {
        qkd::EvePolicy eve;
        eve.intercept_fraction = params.eve_fraction;
        const auto exchange = qkd::bb84_exchange(params.n_qubits, eve, params.channel_flip_prob, rng);

        TransferAttempt record;
        record.qber = exchange.sacrificed.ratio;
        record.sifted_bits = exchange.alice_key.bits.size() + exchange.sacrificed_indices.size();
        record.gate = qkd::keygate(exchange.sacrificed, params.abort_threshold);
        outcome.attempts.push_back(record);
        outcome.eve_information_bits = qkd::eve_information(exchange.alice_key, eve.records);
        if (record.gate == qkd::GateDecision::Abort) continue;

        // Both ends hold the same reconciled bits; model the two copies
        // separately so pad consumption stays one-sided.
        qkd::KeyMaterial sender_key = qkd::reconcile_keys(exchange.alice_key, exchange.bob_key,
                                                          exchange.sacrificed, rng);
        qkd::KeyMaterial receiver_key = sender_key;

        std::vector<std::uint8_t> delivered;
        if (params.key_mode == config::KeyMode::Otp) {
            std::vector<std::uint8_t> ciphertext;
            try {
                ciphertext = qkd::otp_encrypt(message, sender_key);
            } catch (const qkd::KeyExhaustionError&) {
                // Rough sizing: half the qubits sift, half of those survive the
                // sacrifice, so a message of b bits wants >= 4b qubits plus margin.
                const std::size_t needed = 8 * message.size() * 5;
                throw config::ConfigError(
                    "qkd: one-time pad shorter than the model update; raise qkd.n_qubits to at least " +
                    std::to_string(needed));
            }
            delivered = qkd::otp_decrypt(ciphertext, receiver_key);
        } else {
            const auto sender_cipher = qkd::derive_cipher_key(sender_key);
            const auto receiver_cipher = qkd::derive_cipher_key(receiver_key);
            chacha::ChaChaKey key;
            key.key = sender_cipher;
            store_le32(key.nonce.data(), update.robot_id);
            store_le32(key.nonce.data() + 4, update.session_index);
            key.nonce[8] = static_cast<std::uint8_t>(attempt);
            const auto frame = chacha::encrypt(key, message);
            chacha::ChaChaKey rx = key;
            rx.key = receiver_cipher;
            delivered = chacha::decrypt(rx, frame);
        }

        fedlearn::LocalUpdate received = deserialize_update(delivered);
        if (received.weights.values != update.weights.values ||
            received.n_samples != update.n_samples || received.robot_id != update.robot_id)
            throw InvariantViolation("global_exchange: delivered update differs from the sender's");
        received.weights.version = update.weights.version;
        server.submit(std::move(received));
        outcome.delivered = true;
        return outcome;
    }
    return outcome;  // dropped after max_attempts aborts
}

}  // namespace nppsim::servers
