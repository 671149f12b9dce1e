#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace mathdef {

struct Sentence;

/// Minimal (id, text) view shared by sentences, datasets and predictions.
struct TextRecord {
    std::string id;
    std::string text;
};

struct LabeledExample {
    std::string id;
    std::string text;
    int label = 0;  // 1 = definitional
    std::string corpus;
    std::optional<std::string> duplicate_of;  // set on oversampling copies

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct DatasetMeta {
    std::string name;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> created_from;
};

struct Dataset {
    std::vector<LabeledExample> examples;
    DatasetMeta meta;

    std::size_t size() const { return examples.size(); }
    std::size_t positives() const;
};

/// Exact positive fraction. `value()` is 0 for an empty dataset, which
/// `empty()` flags.
struct Density {
    std::size_t positives = 0;
    std::size_t total = 0;

    bool empty() const { return total == 0; }
    double value() const { return total == 0 ? 0.0 : static_cast<double>(positives) / static_cast<double>(total); }
};

Density density(const Dataset& d);

/// One example per record. Every record needs a label and every annotation a
/// record; either mismatch throws DataError.
Dataset attach_labels(std::span<const TextRecord> sentences, const std::map<std::string, int>& annotations,
                      const std::string& corpus, const std::string& name = "dataset");
Dataset attach_labels(std::span<const Sentence> sentences, const std::map<std::string, int>& annotations,
                      const std::string& corpus, const std::string& name = "dataset");

/// Concatenation in argument order. An id present in two inputs throws.
Dataset combine(std::span<const Dataset> parts, const std::string& name);

struct SplitResult {
    Dataset train;
    Dataset val;
};

/// |val| = round(val_fraction * |d|); both halves keep the input order.
/// Stratified splits draw round(val_fraction * positives) positives.
/// Datasets holding oversampling copies are rejected.
SplitResult split(const Dataset& d, double val_fraction, std::uint64_t seed, bool stratified = false);

struct OversampleMode {
    enum class Kind { minority, target };
    Kind kind = Kind::minority;
    double target = 0.5;  // used when kind == target

    static OversampleMode minority() { return {}; }
    static OversampleMode to_density(double p) { return {Kind::target, p}; }
};

/// Appends the fewest uniformly drawn copies of positives that lift the
/// density to at least the target (0.5 for minority). Negatives untouched.
/// Throws when there are no positives, when the target is already met, or
/// when positives are not the minority class.
Dataset oversample(const Dataset& train, OversampleMode mode, std::uint64_t seed);

/// Smallest positive count n with n / (n + negatives) >= p, computed on p as
/// an exact decimal fraction.
std::size_t min_positives_for_density(std::size_t negatives, double p);

struct LengthAuditEntry {
    std::string id;
    std::size_t length = 0;  // code points
};

/// Examples whose text is longer than max_len characters. Never modifies text.
std::vector<LengthAuditEntry> length_audit(const Dataset& d, std::size_t max_len = 512);

// JSONL schema: {"id", "text", "label": 0|1, "corpus", "origin": "original"|"dup:<id>"}
nlohmann::json to_json(const LabeledExample& ex);
LabeledExample example_from_json(const nlohmann::json& row, const std::string& where);

Dataset read_dataset(const std::filesystem::path& path);
Dataset dataset_from_jsonl(std::string_view text, const std::string& name);
std::string dataset_to_jsonl(const Dataset& d);

/// Every copy must name an original example of `d` with the same text and label.
void validate_duplicates(const Dataset& d);

/// Annotations JSONL: {"id", "label"}. Duplicate ids throw.
std::map<std::string, int> read_annotations(const std::filesystem::path& path);

}  // namespace mathdef
