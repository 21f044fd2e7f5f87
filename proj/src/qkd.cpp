#include "nppsim/qkd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace nppsim::qkd {

namespace {

Bit coin(Rng& rng) { return static_cast<Bit>(rng() & 1u); }

bool bernoulli(double p, Rng& rng) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(rng) < p;
}

}  // namespace

ExchangeResult bb84_exchange(std::size_t n_qubits, EvePolicy& eve, double channel_flip_prob, Rng& rng) {
    if (n_qubits < 64)
        throw std::invalid_argument("bb84_exchange: need at least 64 qubits for a usable QBER estimate");
    if (eve.intercept_fraction < 0.0 || eve.intercept_fraction > 1.0)
        throw std::invalid_argument("bb84_exchange: intercept fraction must be in [0, 1]");
    if (channel_flip_prob < 0.0 || channel_flip_prob > 1.0)
        throw std::invalid_argument("bb84_exchange: flip probability must be in [0, 1]");

    ExchangeResult result;
    auto& alice = result.alice_frame;
    alice.bits.resize(n_qubits);
    alice.bases.resize(n_qubits);
    eve.records.assign(n_qubits, std::nullopt);
    result.bob_bases.resize(n_qubits);

    std::vector<Bit> bob_bits(n_qubits);
    for (std::size_t i = 0; i < n_qubits; ++i) {
        alice.bits[i] = coin(rng);
        alice.bases[i] = static_cast<Basis>(coin(rng));

        // Qubits are modeled at measurement statistics: matching basis reads
        // the prepared bit, mismatched basis reads a fair coin.
        Bit in_flight = alice.bits[i];
        Basis flight_basis = alice.bases[i];
        if (bernoulli(eve.intercept_fraction, rng)) {
            const Basis eve_basis = static_cast<Basis>(coin(rng));
            const Bit measured = eve_basis == flight_basis ? in_flight : coin(rng);
            eve.records[i] = measured;
            in_flight = measured;       // resend collapses the state
            flight_basis = eve_basis;
        }

        result.bob_bases[i] = static_cast<Basis>(coin(rng));
        Bit measured = result.bob_bases[i] == flight_basis ? in_flight : coin(rng);
        if (bernoulli(channel_flip_prob, rng)) measured ^= 1u;
        bob_bits[i] = measured;
    }

    // Sifting: keep only matching-basis positions.
    std::vector<std::size_t> sifted;
    for (std::size_t i = 0; i < n_qubits; ++i)
        if (alice.bases[i] == result.bob_bases[i]) sifted.push_back(i);

    // Sacrifice a random half for the error estimate; the rest become keys.
    std::vector<std::size_t> order(sifted.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_sacrifice = sifted.size() / 2;
    if (n_sacrifice == 0)
        throw std::invalid_argument("bb84_exchange: sifted key too short to estimate QBER");

    std::vector<bool> is_sacrificed(sifted.size(), false);
    for (std::size_t k = 0; k < n_sacrifice; ++k) is_sacrificed[order[k]] = true;

    std::size_t errors = 0;
    for (std::size_t k = 0; k < sifted.size(); ++k) {
        const std::size_t i = sifted[k];
        if (is_sacrificed[k]) {
            result.sacrificed_indices.push_back(i);
            if (alice.bits[i] != bob_bits[i]) ++errors;
        } else {
            result.alice_key.bits.push_back(alice.bits[i]);
            result.alice_key.source_indices.push_back(i);
            result.bob_key.bits.push_back(bob_bits[i]);
            result.bob_key.source_indices.push_back(i);
        }
    }
    result.sacrificed.errors = errors;
    result.sacrificed.total = n_sacrifice;
    result.sacrificed.ratio = qber(errors, n_sacrifice);
    return result;
}

double qber(std::size_t errors, std::size_t total) {
    if (total == 0) throw std::invalid_argument("qber: total must be positive");
    return static_cast<double>(errors) / static_cast<double>(total);
}

GateDecision keygate(const QberEstimate& estimate, double abort_threshold) {
    return estimate.ratio > abort_threshold ? GateDecision::Abort : GateDecision::Accept;
}

Bytes KeyMaterial::take_bytes(std::size_t n) {
    if (remaining_bits() < 8 * n)
        throw KeyExhaustionError("one-time pad key exhausted: need " + std::to_string(8 * n) +
                                 " bits, have " + std::to_string(remaining_bits()));
    Bytes out(n, 0);
    for (std::size_t j = 0; j < n; ++j)
        for (int k = 0; k < 8; ++k)
            out[j] = static_cast<std::uint8_t>(out[j] << 1 | (bits_[consumed_ + 8 * j + k] & 1u));
    consumed_ += 8 * n;
    return out;
}

Bytes otp_encrypt(std::span<const std::uint8_t> message, KeyMaterial& key) {
    const Bytes pad = key.take_bytes(message.size());
    Bytes out(message.size());
    for (std::size_t i = 0; i < message.size(); ++i) out[i] = message[i] ^ pad[i];
    return out;
}

Bytes otp_decrypt(std::span<const std::uint8_t> ciphertext, KeyMaterial& key) {
    return otp_encrypt(ciphertext, key);  // XOR is an involution
}

double eve_information(const SiftedKey& alice_key, const std::vector<std::optional<Bit>>& eve_records) {
    if (alice_key.bits.empty()) return 0.0;
    // Joint histogram over (alice bit, eve symbol). A position Eve never
    // intercepted contributes half a count to each of her symbols, the
    // expected histogram of an independent uniform bit.
    double joint[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (std::size_t k = 0; k < alice_key.bits.size(); ++k) {
        const std::size_t i = alice_key.source_indices[k];
        const Bit a = alice_key.bits[k];
        const auto& rec = i < eve_records.size() ? eve_records[i] : std::nullopt;
        if (rec.has_value()) {
            joint[a][*rec] += 1.0;
        } else {
            joint[a][0] += 0.5;
            joint[a][1] += 0.5;
        }
    }
    const double n = joint[0][0] + joint[0][1] + joint[1][0] + joint[1][1];
    double info = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int e = 0; e < 2; ++e) {
            const double p = joint[a][e] / n;
            if (p <= 0.0) continue;
            const double pa = (joint[a][0] + joint[a][1]) / n;
            const double pe = (joint[0][e] + joint[1][e]) / n;
            info += p * std::log2(p / (pa * pe));
        }
    }
    return std::max(0.0, info);
}

KeyMaterial reconcile_keys(const SiftedKey& alice_key, const SiftedKey& bob_key,
                           const QberEstimate& estimate, Rng& rng) {
    if (alice_key.bits.size() != bob_key.bits.size())
        throw std::invalid_argument("reconcile_keys: key lengths differ");
    const std::size_t len = alice_key.bits.size();
    const auto discard = static_cast<std::size_t>(std::ceil(2.0 * estimate.ratio * static_cast<double>(len)));
    if (discard >= len) return KeyMaterial{{}};

    std::vector<std::size_t> order(len);
    for (std::size_t i = 0; i < len; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> dropped(len, false);
    for (std::size_t k = 0; k < discard; ++k) dropped[order[k]] = true;

    std::vector<Bit> shared;
    shared.reserve(len - discard);
    for (std::size_t i = 0; i < len; ++i)
        if (!dropped[i]) shared.push_back(alice_key.bits[i]);
    return KeyMaterial{std::move(shared)};
}

namespace {

constexpr std::uint32_t kSha256K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

}  // namespace

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
    std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                          0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::vector<std::uint8_t> msg(data.begin(), data.end());
    const std::uint64_t bit_len = static_cast<std::uint64_t>(msg.size()) * 8;
    msg.push_back(0x80);
    while (msg.size() % 64 != 56) msg.push_back(0x00);
    for (int i = 7; i >= 0; --i) msg.push_back(static_cast<std::uint8_t>(bit_len >> (8 * i)));

    for (std::size_t off = 0; off < msg.size(); off += 64) {
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = static_cast<std::uint32_t>(msg[off + 4 * i]) << 24 |
                   static_cast<std::uint32_t>(msg[off + 4 * i + 1]) << 16 |
                   static_cast<std::uint32_t>(msg[off + 4 * i + 2]) << 8 |
                   static_cast<std::uint32_t>(msg[off + 4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = std::rotr(w[i - 15], 7) ^ std::rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = std::rotr(w[i - 2], 17) ^ std::rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = std::rotr(e, 6) ^ std::rotr(e, 11) ^ std::rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + s1 + ch + kSha256K[i] + w[i];
            const std::uint32_t s0 = std::rotr(a, 2) ^ std::rotr(a, 13) ^ std::rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + maj;
            hh = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }
    std::array<std::uint8_t, 32> out;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) out[4 * i + j] = static_cast<std::uint8_t>(h[i] >> (24 - 8 * j));
    return out;
}

std::array<std::uint8_t, 32> derive_cipher_key(KeyMaterial& key) {
    const Bytes seed = key.take_bytes(32);
    return sha256(seed);
}

}  // namespace nppsim::qkd
