#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nppsim/rng.hpp"

namespace nppsim::qkd {

using Bit = std::uint8_t;  // 0 or 1
using Bytes = std::vector<std::uint8_t>;

struct KeyExhaustionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Basis : std::uint8_t { Rectilinear = 0, Diagonal = 1 };

/// Sender-side preparation: raw key bits and the bases they were encoded in.
struct QubitFrame {
    std::vector<Bit> bits;
    std::vector<Basis> bases;
};

/// Bits surviving basis reconciliation, with their raw-frame positions.
struct SiftedKey {
    std::vector<Bit> bits;
    std::vector<std::size_t> source_indices;  // strictly increasing
};

/// QBER sample: E disagreements out of N sacrificed bits.
struct QberEstimate {
    std::size_t errors = 0;
    std::size_t total = 0;
    double ratio = 0.0;
};

/// Intercept-resend adversary. `records` is filled by the exchange with
/// Eve's measurement at every intercepted raw position.
struct EvePolicy {
    double intercept_fraction = 0.0;
    std::vector<std::optional<Bit>> records;
};

struct ExchangeResult {
    SiftedKey alice_key;
    SiftedKey bob_key;
    QberEstimate sacrificed;
    QubitFrame alice_frame;           // kept for diagnostics and tests
    std::vector<Basis> bob_bases;
    std::vector<std::size_t> sacrificed_indices;  // raw positions burned for the estimate
};

// Full BB84 pass: prepare, optionally intercept-resend, transmit with
// channel flips, measure, sift, and sacrifice half the sifted bits for the
// QBER estimate. Requires n_qubits >= 64.
ExchangeResult bb84_exchange(std::size_t n_qubits, EvePolicy& eve, double channel_flip_prob, Rng& rng);

// E/N. Throws std::invalid_argument when total is zero.
double qber(std::size_t errors, std::size_t total);

enum class GateDecision { Accept, Abort };

// Abort strictly above the threshold.
GateDecision keygate(const QberEstimate& estimate, double abort_threshold);

/// One-time-pad key bits with consumed-offset bookkeeping; bits are never
/// handed out twice.
class KeyMaterial {
  public:
    KeyMaterial() = default;
    explicit KeyMaterial(std::vector<Bit> bits) : bits_(std::move(bits)) {}

    std::size_t remaining_bits() const { return bits_.size() - consumed_; }
    std::size_t consumed_bits() const { return consumed_; }

    // Next n bytes of key stream (8n bits, MSB-first per byte). Throws
    // KeyExhaustionError rather than reusing bits.
    Bytes take_bytes(std::size_t n);

  private:
    std::vector<Bit> bits_;
    std::size_t consumed_ = 0;
};

// E = M xor K. Consumes 8*|message| key bits; decrypt is the same
// operation with the peer's copy of the key.
Bytes otp_encrypt(std::span<const std::uint8_t> message, KeyMaterial& key);
Bytes otp_decrypt(std::span<const std::uint8_t> ciphertext, KeyMaterial& key);

// Plug-in mutual information (bits per symbol) between Alice's sifted bits
// and Eve's records at those positions. Positions Eve never touched enter
// the joint histogram as an independent uniform symbol.
double eve_information(const SiftedKey& alice_key, const std::vector<std::optional<Bit>>& eve_records);

// Stand-in for error correction + privacy amplification: discards
// ceil(2*qber*len) bits and aligns Bob's remainder to Alice's. Returns the
// shared key material.
KeyMaterial reconcile_keys(const SiftedKey& alice_key, const SiftedKey& bob_key,
                           const QberEstimate& estimate, Rng& rng);

// SHA-256 (FIPS 180-4), used to derive a 256-bit cipher key from sifted bits.
std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

// Consumes 256 key bits and hashes them into a ChaCha key.
std::array<std::uint8_t, 32> derive_cipher_key(KeyMaterial& key);

}  // namespace nppsim::qkd
