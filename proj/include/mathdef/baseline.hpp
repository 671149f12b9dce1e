#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mathdef/dataset.hpp"

namespace mathdef {

struct SparseEntry {
    std::uint32_t index = 0;
    double value = 0.0;
    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sorted by index, no duplicate indices, no zero values.
using SparseVector = std::vector<SparseEntry>;

struct BaselineConfig {
    std::uint32_t dim = 1u << 18;  // feature-hash buckets, power of two
    int ngram_min = 1;
    int ngram_max = 2;
    double lr = 0.1;
    double l2 = 1e-4;
    int epochs = 3;
    int batch_size = 10;
    std::uint64_t seed = 0;

    /// Throws DataError describing the first invalid field.
    void validate() const;

    friend bool operator==(const BaselineConfig&, const BaselineConfig&) = default;
};

inline constexpr std::string_view kMathSymbol = "<MATH>";

/// Cue phrases that get their own indicator feature.
const std::vector<std::string>& cue_phrases();

/// Lowercased word n-grams (math regions collapse to "<MATH>"), cue-phrase
/// indicators and a coarse length bucket, hashed with sign hashing into
/// `cfg.dim` buckets. Empty text gives the zero vector.
SparseVector featurize(std::string_view sentence_text, const BaselineConfig& cfg);

struct BaselineModel {
    BaselineConfig config;
    std::vector<double> weights;  // size == config.dim
    double bias = 0.0;

    static BaselineModel zeros(const BaselineConfig& cfg);
    double margin(const SparseVector& x) const;

    friend bool operator==(const BaselineModel&, const BaselineModel&) = default;
};

/// Numerically stable logistic function; sigmoid(0) == 0.5 exactly.
double sigmoid(double z);

struct LossGradient {
    double loss = 0.0;              // mean BCE + (l2/2) * ||w||^2
    std::vector<double> data_grad;  // gradient of the mean BCE term only
    double bias_grad = 0.0;

    /// data_grad + l2 * w: the gradient of the full objective.
    std::vector<double> full_grad(const BaselineModel& m) const;
};

/// Regularized objective and its analytic gradient on a batch.
LossGradient loss_and_gradient(const BaselineModel& model, std::span<const SparseVector> features,
                               std::span<const int> labels);

/// Regularized objective only.
double objective(const BaselineModel& model, std::span<const SparseVector> features, std::span<const int> labels);

struct TrainResult {
    BaselineModel model;
    /// loss_trace[0] is the objective at initialization; entry e is the
    /// objective on the full training set after epoch e.
    std::vector<double> loss_trace;
};

/// Mini-batch gradient descent, reshuffled each epoch from config.seed.
/// Requires both classes. A non-finite loss throws with a hint to lower lr.
TrainResult train(const Dataset& train_set, const BaselineConfig& config);

struct PredictionRecord {
    std::string id;
    double score = 0.0;
    int label = 0;

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// score = sigmoid(w.x + b); label = score >= threshold. Input order kept.
std::vector<PredictionRecord> predict(const BaselineModel& model, std::span<const TextRecord> items,
                                      double threshold = 0.5);
std::vector<PredictionRecord> predict(const BaselineModel& model, const Dataset& ds, double threshold = 0.5);

// Model file: {"format":"mathdef-baseline","version":1,"config":{…},"bias":b,"weights":[[index,value],…]}
// listing non-zero weights only.
nlohmann::json to_json(const BaselineModel& model);
BaselineModel model_from_json(const nlohmann::json& j);
void save_model(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_model(const std::filesystem::path& path);

// Predictions JSONL: {"id", "score", "label"}
nlohmann::json to_json(const PredictionRecord& p);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
std::vector<PredictionRecord> predictions_from_jsonl(std::string_view text, const std::string& source);

}  // namespace mathdef
