#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nppsim/envsim.hpp"
#include "nppsim/rng.hpp"

namespace nppsim::fedlearn {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Flat softmax-classifier parameters: row-major (classes x features)
/// weight matrix followed by one bias per class. `version` counts
/// aggregation rounds.
struct ModelWeights {
    std::size_t classes = 0;
    std::size_t features = 0;
    std::vector<double> values;  // classes*features weights, then classes biases
    std::uint64_t version = 0;

    static ModelWeights zeros(std::size_t classes, std::size_t features);
    std::size_t expected_size() const { return classes * features + classes; }
    double weight(std::size_t c, std::size_t f) const { return values[c * features + f]; }
    double& weight(std::size_t c, std::size_t f) { return values[c * features + f]; }
    double bias(std::size_t c) const { return values[classes * features + c]; }
    double& bias(std::size_t c) { return values[classes * features + c]; }
};

struct LocalUpdate {
    ModelWeights weights;
    std::size_t n_samples = 0;
    std::uint32_t robot_id = 0;
    std::uint32_t session_index = 0;
};

struct Sample {
    std::vector<double> features;
    std::size_t label = 0;
};

using Dataset = std::vector<Sample>;

/// Table-row metrics. roc_auc is absent when the test set has one class.
struct SessionMetrics {
    double accuracy = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::optional<double> roc_auc;
};

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 3;
    std::size_t batch_size = 32;
};

// Softmax of the per-class affine scores.
std::vector<double> predict(const ModelWeights& weights, std::span<const double> features);

// Mean cross-entropy over a dataset.
double cross_entropy(const ModelWeights& weights, const Dataset& data);

// Analytic gradient of the mean cross-entropy, same layout as values.
std::vector<double> cross_entropy_gradient(const ModelWeights& weights, const Dataset& data);

// Mini-batch SGD for `epochs` passes over a seeded shuffle of the data,
// starting from the global weights. Empty data returns the weights
// unchanged with n_samples = 0.
LocalUpdate local_train(const ModelWeights& global, const Dataset& data, const TrainConfig& cfg,
                        Rng& rng, std::uint32_t robot_id = 0, std::uint32_t session_index = 0);

// Sample-count-weighted average, summed in ascending robot_id order so the
// result is bit-reproducible under input permutation. Updates with
// n_samples = 0 are excluded; all-zero participation is an error.
ModelWeights fedavg(const std::vector<LocalUpdate>& updates);

// Weighted sum of per-robot mean cross-entropies.
double global_loss(const ModelWeights& weights, const std::vector<Dataset>& datasets);

// Accuracy under argmax; precision/recall/F1 per class then
// support-weighted; ROC AUC one-vs-rest per class, support-weighted.
SessionMetrics evaluate(const ModelWeights& weights, const Dataset& test);

// One-vs-rest AUC by trapezoidal sweep over score thresholds.
double roc_auc_binary(std::span<const double> scores, std::span<const std::uint8_t> positives);

// dims header (classes, features as 32-bit LE) followed by the float64
// values in layout order.
std::vector<std::uint8_t> serialize_weights(const ModelWeights& weights);
ModelWeights deserialize_weights(std::span<const std::uint8_t> bytes);

/// Maps raw gas readings to the 7-dimensional feature vector: the three
/// standardized concentrations, their squares, and the norm of the
/// standardized vector.
struct FeatureScaler {
    envsim::GasVector mean{420.0, 1.0, 2.0};
    envsim::GasVector sd{850.0, 42.5, 850.0};

    std::vector<double> featurize(const envsim::GasVector& gases) const;
    static constexpr std::size_t kFeatures = 7;
};

}  // namespace nppsim::fedlearn
