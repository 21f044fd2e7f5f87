#include "nppsim/fedlearn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

namespace nppsim::fedlearn {

ModelWeights ModelWeights::zeros(std::size_t classes, std::size_t features) {
    ModelWeights w;
    w.classes = classes;
    w.features = features;
    w.values.assign(w.expected_size(), 0.0);
    return w;
}

std::vector<double> predict(const ModelWeights& w, std::span<const double> features) {
    if (w.values.size() != w.expected_size() || features.size() != w.features)
        throw DimensionError("predict: feature dimension does not match model");
    std::vector<double> scores(w.classes);
    for (std::size_t c = 0; c < w.classes; ++c) {
        double s = w.bias(c);
        for (std::size_t f = 0; f < w.features; ++f) s += w.weight(c, f) * features[f];
        scores[c] = s;
    }
    const double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double& s : scores) {
        s = std::exp(s - m);
        z += s;
    }
    for (double& s : scores) s /= z;
    return scores;
}

double cross_entropy(const ModelWeights& w, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("cross_entropy: empty dataset");
    double loss = 0.0;
    for (const Sample& s : data) {
        if (s.label >= w.classes) throw DimensionError("cross_entropy: label out of range");
        const auto p = predict(w, s.features);
        loss += -std::log(std::max(p[s.label], 1e-300));
    }
    return loss / static_cast<double>(data.size());
}

std::vector<double> cross_entropy_gradient(const ModelWeights& w, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("cross_entropy_gradient: empty dataset");
    std::vector<double> grad(w.expected_size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (const Sample& s : data) {
        const auto p = predict(w, s.features);
        for (std::size_t c = 0; c < w.classes; ++c) {
            const double delta = (p[c] - (c == s.label ? 1.0 : 0.0)) * inv_n;
            for (std::size_t f = 0; f < w.features; ++f) grad[c * w.features + f] += delta * s.features[f];
            grad[w.classes * w.features + c] += delta;
        }
    }
    return grad;
}

LocalUpdate local_train(const ModelWeights& global, const Dataset& data, const TrainConfig& cfg,
                        Rng& rng, std::uint32_t robot_id, std::uint32_t session_index) {
    if (!(cfg.learning_rate >= 0.0) || cfg.epochs < 1 || cfg.batch_size < 1)
        throw std::invalid_argument("local_train: bad training configuration");
    LocalUpdate update;
    update.weights = global;
    update.robot_id = robot_id;
    update.session_index = session_index;
    update.n_samples = data.size();
    if (data.empty()) return update;

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Dataset batch;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);
            const auto grad = cross_entropy_gradient(update.weights, batch);
            for (std::size_t i = 0; i < grad.size(); ++i)
                update.weights.values[i] -= cfg.learning_rate * grad[i];
        }
    }
    return update;
}

ModelWeights fedavg(const std::vector<LocalUpdate>& updates) {
    std::vector<const LocalUpdate*> active;
    for (const auto& u : updates)
        if (u.n_samples > 0) active.push_back(&u);
    if (active.empty())
        throw std::invalid_argument("fedavg: no update carries samples; round skipped");
    // Fixed summation order keeps the result bit-identical under permutation.
    std::sort(active.begin(), active.end(),
              [](const LocalUpdate* a, const LocalUpdate* b) { return a->robot_id < b->robot_id; });

    const ModelWeights& first = active.front()->weights;
    double total = 0.0;
    for (const auto* u : active) {
        if (u->weights.classes != first.classes || u->weights.features != first.features ||
            u->weights.values.size() != first.values.size())
            throw DimensionError("fedavg: inconsistent weight dimensions");
        total += static_cast<double>(u->n_samples);
    }

    ModelWeights out = ModelWeights::zeros(first.classes, first.features);
    for (const auto* u : active) {
        const double coeff = static_cast<double>(u->n_samples) / total;
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += coeff * u->weights.values[i];
    }
    std::uint64_t version = 0;
    for (const auto* u : active) version = std::max(version, u->weights.version);
    out.version = version + 1;
    return out;
}

double global_loss(const ModelWeights& weights, const std::vector<Dataset>& datasets) {
    if (datasets.empty()) throw std::invalid_argument("global_loss: no datasets");
    double total = 0.0;
    for (const Dataset& d : datasets) total += static_cast<double>(d.size());
    if (total == 0.0) throw std::invalid_argument("global_loss: all datasets empty");
    double loss = 0.0;
    for (const Dataset& d : datasets) {
        if (d.empty()) continue;
        loss += (static_cast<double>(d.size()) / total) * cross_entropy(weights, d);
    }
    return loss;
}

double roc_auc_binary(std::span<const double> scores, std::span<const std::uint8_t> positives) {
    if (scores.size() != positives.size() || scores.empty())
        throw std::invalid_argument("roc_auc_binary: bad inputs");
    double n_pos = 0.0, n_neg = 0.0;
    for (std::uint8_t p : positives) (p ? n_pos : n_neg) += 1.0;
    if (n_pos == 0.0 || n_neg == 0.0)
        throw std::invalid_argument("roc_auc_binary: need both classes present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Threshold sweep with tie groups; trapezoids across each group match
    // pair counting with half credit for ties.
    double auc = 0.0, tp = 0.0, fp = 0.0;
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t j = k;
        double dtp = 0.0, dfp = 0.0;
        while (j < order.size() && scores[order[j]] == scores[order[k]]) {
            (positives[order[j]] ? dtp : dfp) += 1.0;
            ++j;
        }
        auc += dfp / n_neg * (tp + dtp / 2.0) / n_pos;
        tp += dtp;
        fp += dfp;
        k = j;
    }
    return auc;
}

SessionMetrics evaluate(const ModelWeights& weights, const Dataset& test) {
    if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
    const std::size_t k = weights.classes;
    std::vector<double> support(k, 0.0), tp(k, 0.0), predicted(k, 0.0);
    std::vector<std::vector<double>> probs(test.size());

    double correct = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        probs[i] = predict(weights, test[i].features);
        const auto arg = static_cast<std::size_t>(
            std::max_element(probs[i].begin(), probs[i].end()) - probs[i].begin());
        const std::size_t y = test[i].label;
        if (y >= k) throw DimensionError("evaluate: label out of range");
        support[y] += 1.0;
        predicted[arg] += 1.0;
        if (arg == y) {
            tp[y] += 1.0;
            correct += 1.0;
        }
    }
    const double n = static_cast<double>(test.size());

    SessionMetrics m;
    m.accuracy = correct / n;
    std::size_t classes_present = 0;
    for (std::size_t c = 0; c < k; ++c) {
        if (support[c] == 0.0) continue;
        ++classes_present;
        const double prec = predicted[c] > 0.0 ? tp[c] / predicted[c] : 0.0;
        const double rec = tp[c] / support[c];
        const double f1 = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
        const double wgt = support[c] / n;
        m.precision += wgt * prec;
        m.recall += wgt * rec;
        m.f1 += wgt * f1;
    }

    if (classes_present >= 2) {
        double auc = 0.0;
        std::vector<double> scores(test.size());
        std::vector<std::uint8_t> positives(test.size());
        for (std::size_t c = 0; c < k; ++c) {
            if (support[c] == 0.0) continue;
            for (std::size_t i = 0; i < test.size(); ++i) {
                scores[i] = probs[i][c];
                positives[i] = test[i].label == c ? 1 : 0;
            }
            auc += (support[c] / n) * roc_auc_binary(scores, positives);
        }
        m.roc_auc = auc;
    }
    return m;
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

std::vector<std::uint8_t> serialize_weights(const ModelWeights& w) {
    if (w.values.size() != w.expected_size())
        throw DimensionError("serialize_weights: value count does not match dims");
    for (double v : w.values)
        if (!std::isfinite(v)) throw std::invalid_argument("serialize_weights: non-finite value");
    std::vector<std::uint8_t> out(8 + 8 * w.values.size());
    store_le32(out.data(), static_cast<std::uint32_t>(w.classes));
    store_le32(out.data() + 4, static_cast<std::uint32_t>(w.features));
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &w.values[i], 8);
        for (int b = 0; b < 8; ++b) out[8 + 8 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    return out;
}

ModelWeights deserialize_weights(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8) throw std::invalid_argument("deserialize_weights: header truncated");
    ModelWeights w;
    w.classes = load_le32(bytes.data());
    w.features = load_le32(bytes.data() + 4);
    const std::size_t expect = w.classes * w.features + w.classes;
    if (w.classes == 0 || w.classes > 4096 || w.features > 4096 || bytes.size() != 8 + 8 * expect)
        throw std::invalid_argument("deserialize_weights: corrupt header or size mismatch");
    w.values.resize(expect);
    for (std::size_t i = 0; i < expect; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[8 + 8 * i + b]) << (8 * b);
        std::memcpy(&w.values[i], &bits, 8);
    }
    return w;
}

std::vector<double> FeatureScaler::featurize(const envsim::GasVector& gases) const {
    const double z0 = (gases.co2_ppm - mean.co2_ppm) / sd.co2_ppm;
    const double z1 = (gases.co_ppm - mean.co_ppm) / sd.co_ppm;
    const double z2 = (gases.ch4_ppm - mean.ch4_ppm) / sd.ch4_ppm;
    return {z0, z1, z2, z0 * z0, z1 * z1, z2 * z2, std::sqrt(z0 * z0 + z1 * z1 + z2 * z2)};
}

}  // namespace nppsim::fedlearn
