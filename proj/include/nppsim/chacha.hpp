#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

namespace nppsim::chacha {

using Bytes = std::vector<std::uint8_t>;

struct NonceReuseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 256-bit key, 96-bit nonce, 32-bit initial block counter (RFC 8439 layout).
struct ChaChaKey {
    std::array<std::uint8_t, 32> key{};
    std::array<std::uint8_t, 12> nonce{};
    std::uint32_t initial_counter = 1;
};

// One 64-byte keystream block, 20 rounds, exactly per RFC 8439 2.3.
std::array<std::uint8_t, 64> chacha20_block(const std::array<std::uint8_t, 32>& key,
                                            std::uint32_t counter,
                                            const std::array<std::uint8_t, 12>& nonce);

/// Nonce-prefixed encrypted wire frame: 0x01 | nonce(12) | ciphertext.
struct CipherFrame {
    std::uint8_t version = 0x01;
    std::array<std::uint8_t, 12> nonce{};
    Bytes ciphertext;

    Bytes to_bytes() const;
    static CipherFrame parse(std::span<const std::uint8_t> wire);  // throws EncodingError
};

// Stream encryption starting at key.initial_counter. Stateless; nonce
// bookkeeping belongs to SessionCipher.
CipherFrame encrypt(const ChaChaKey& key, std::span<const std::uint8_t> plaintext);
Bytes decrypt(const ChaChaKey& key, const CipherFrame& frame);

/// Per-session sender: one key, an auto-incrementing message nonce, and a
/// reuse ledger that turns any repeated nonce into a hard failure.
class SessionCipher {
  public:
    SessionCipher(std::array<std::uint8_t, 32> key, std::uint32_t sender_id,
                  std::uint32_t initial_counter = 1);

    CipherFrame encrypt(std::span<const std::uint8_t> plaintext);
    CipherFrame encrypt_with_nonce(const std::array<std::uint8_t, 12>& nonce,
                                   std::span<const std::uint8_t> plaintext);
    Bytes decrypt(const CipherFrame& frame) const;

    const std::array<std::uint8_t, 32>& key() const { return key_; }

  private:
    std::array<std::uint8_t, 32> key_;
    std::uint32_t sender_id_;
    std::uint32_t initial_counter_;
    std::uint64_t next_seq_ = 0;
    std::set<std::array<std::uint8_t, 12>> used_nonces_;
};

/// Fixed 48-byte telemetry payload, little-endian:
/// lat(8) | lon(8) | co2(8) | co(8) | ch4(8) | timestamp_ms(8).
struct TelemetryRecord {
    double lat = 0.0;
    double lon = 0.0;
    double co2_ppm = 0.0;
    double co_ppm = 0.0;
    double ch4_ppm = 0.0;
    std::uint64_t timestamp_ms = 0;

    friend bool operator==(const TelemetryRecord&, const TelemetryRecord&) = default;
};

inline constexpr std::size_t kTelemetryRecordSize = 48;

std::array<std::uint8_t, kTelemetryRecordSize> encode_record(const TelemetryRecord& record);
TelemetryRecord decode_record(std::span<const std::uint8_t> bytes);

// FNV-1a 64 over a byte string; used as the report identity for acks.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace nppsim::chacha
