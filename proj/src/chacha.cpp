#include "nppsim/chacha.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace nppsim::chacha {

namespace {

inline std::uint32_t load_le32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline void store_le32(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
}

inline void quarter_round(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c, std::uint32_t& d) {
    a += b; d ^= a; d = std::rotl(d, 16);
    c += d; b ^= c; b = std::rotl(b, 12);
    a += b; d ^= a; d = std::rotl(d, 8);
    c += d; b ^= c; b = std::rotl(b, 7);
}

}  // namespace

std::array<std::uint8_t, 64> chacha20_block(const std::array<std::uint8_t, 32>& key,
                                            std::uint32_t counter,
                                            const std::array<std::uint8_t, 12>& nonce) {
    std::uint32_t state[16];
    state[0] = 0x61707865;  // "expa" "nd 3" "2-by" "te k"
    state[1] = 0x3320646e;
    state[2] = 0x79622d32;
    state[3] = 0x6b206574;
    for (int i = 0; i < 8; ++i) state[4 + i] = load_le32(key.data() + 4 * i);
    state[12] = counter;
    for (int i = 0; i < 3; ++i) state[13 + i] = load_le32(nonce.data() + 4 * i);

    std::uint32_t w[16];
    std::memcpy(w, state, sizeof w);
    for (int round = 0; round < 10; ++round) {
        quarter_round(w[0], w[4], w[8], w[12]);
        quarter_round(w[1], w[5], w[9], w[13]);
        quarter_round(w[2], w[6], w[10], w[14]);
        quarter_round(w[3], w[7], w[11], w[15]);
        quarter_round(w[0], w[5], w[10], w[15]);
        quarter_round(w[1], w[6], w[11], w[12]);
        quarter_round(w[2], w[7], w[8], w[13]);
        quarter_round(w[3], w[4], w[9], w[14]);
    }
    std::array<std::uint8_t, 64> out;
    for (int i = 0; i < 16; ++i) store_le32(out.data() + 4 * i, w[i] + state[i]);
    return out;
}

namespace {

Bytes xor_keystream(const ChaChaKey& key, std::span<const std::uint8_t> data) {
    Bytes out(data.size());
    std::uint32_t counter = key.initial_counter;
    for (std::size_t off = 0; off < data.size(); off += 64, ++counter) {
        const auto block = chacha20_block(key.key, counter, key.nonce);
        const std::size_t n = std::min<std::size_t>(64, data.size() - off);
        for (std::size_t i = 0; i < n; ++i) out[off + i] = data[off + i] ^ block[i];
    }
    return out;
}

}  // namespace

Bytes CipherFrame::to_bytes() const {
    Bytes wire;
    wire.reserve(1 + nonce.size() + ciphertext.size());
    wire.push_back(version);
    wire.insert(wire.end(), nonce.begin(), nonce.end());
    wire.insert(wire.end(), ciphertext.begin(), ciphertext.end());
    return wire;
}

CipherFrame CipherFrame::parse(std::span<const std::uint8_t> wire) {
    if (wire.size() < 13) throw EncodingError("cipher frame truncated");
    if (wire[0] != 0x01) throw EncodingError("cipher frame has unknown version");
    CipherFrame frame;
    frame.version = wire[0];
    std::memcpy(frame.nonce.data(), wire.data() + 1, 12);
    frame.ciphertext.assign(wire.begin() + 13, wire.end());
    return frame;
}

CipherFrame encrypt(const ChaChaKey& key, std::span<const std::uint8_t> plaintext) {
    CipherFrame frame;
    frame.nonce = key.nonce;
    frame.ciphertext = xor_keystream(key, plaintext);
    return frame;
}

Bytes decrypt(const ChaChaKey& key, const CipherFrame& frame) {
    ChaChaKey k = key;
    k.nonce = frame.nonce;
    return xor_keystream(k, frame.ciphertext);
}

SessionCipher::SessionCipher(std::array<std::uint8_t, 32> key, std::uint32_t sender_id,
                             std::uint32_t initial_counter)
    : key_(key), sender_id_(sender_id), initial_counter_(initial_counter) {}

CipherFrame SessionCipher::encrypt(std::span<const std::uint8_t> plaintext) {
    // sender id (4 bytes) | per-session message sequence (8 bytes), LE.
    std::array<std::uint8_t, 12> nonce{};
    store_le32(nonce.data(), sender_id_);
    const std::uint64_t seq = next_seq_++;
    for (int i = 0; i < 8; ++i) nonce[4 + i] = static_cast<std::uint8_t>(seq >> (8 * i));
    return encrypt_with_nonce(nonce, plaintext);
}

CipherFrame SessionCipher::encrypt_with_nonce(const std::array<std::uint8_t, 12>& nonce,
                                              std::span<const std::uint8_t> plaintext) {
    if (!used_nonces_.insert(nonce).second)
        throw NonceReuseError("nonce already used under this session key");
    ChaChaKey k;
    k.key = key_;
    k.nonce = nonce;
    k.initial_counter = initial_counter_;
    return chacha::encrypt(k, plaintext);
}

Bytes SessionCipher::decrypt(const CipherFrame& frame) const {
    ChaChaKey k;
    k.key = key_;
    k.initial_counter = initial_counter_;
    return chacha::decrypt(k, frame);
}

namespace {

void store_f64(std::uint8_t* p, double v) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(bits >> (8 * i));
}

double load_f64(const std::uint8_t* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace

std::array<std::uint8_t, kTelemetryRecordSize> encode_record(const TelemetryRecord& r) {
    const double fields[5] = {r.lat, r.lon, r.co2_ppm, r.co_ppm, r.ch4_ppm};
    for (double f : fields)
        if (!std::isfinite(f)) throw EncodingError("telemetry record has non-finite field");
    std::array<std::uint8_t, kTelemetryRecordSize> out{};
    for (int i = 0; i < 5; ++i) store_f64(out.data() + 8 * i, fields[i]);
    for (int i = 0; i < 8; ++i) out[40 + i] = static_cast<std::uint8_t>(r.timestamp_ms >> (8 * i));
    return out;
}

TelemetryRecord decode_record(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kTelemetryRecordSize)
        throw EncodingError("telemetry record must be exactly 48 bytes");
    TelemetryRecord r;
    r.lat = load_f64(bytes.data());
    r.lon = load_f64(bytes.data() + 8);
    r.co2_ppm = load_f64(bytes.data() + 16);
    r.co_ppm = load_f64(bytes.data() + 24);
    r.ch4_ppm = load_f64(bytes.data() + 32);
    r.timestamp_ms = 0;
    for (int i = 0; i < 8; ++i) r.timestamp_ms |= static_cast<std::uint64_t>(bytes[40 + i]) << (8 * i);
    return r;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace nppsim::chacha
