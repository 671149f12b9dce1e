#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mathdef/baseline.hpp"
#include "mathdef/dataset.hpp"

namespace mathdef {

/// Positive class = definitional.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// An exact non-negative fraction. den == 0 marks a 0/0 metric, whose value
/// is reported as 0.
struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 0;

    bool degenerate() const { return den == 0; }
    double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

struct ClassMetrics {
    Ratio precision;
    Ratio recall;
    Ratio f1;  // 2tp / (2tp + fp + fn), the harmonic mean of precision and recall
    std::uint64_t support = 0;

    friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct EvalReport {
    ClassMetrics def;
    ClassMetrics not_def;
    Ratio accuracy;
    ConfusionMatrix confusion;
    std::optional<std::string> slice;

    double macro_precision() const { return (def.precision.value() + not_def.precision.value()) / 2; }
    double macro_recall() const { return (def.recall.value() + not_def.recall.value()) / 2; }
    double macro_f1() const { return (def.f1.value() + not_def.f1.value()) / 2; }

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Gold labels by id, from a labeled dataset.
std::map<std::string, int> gold_labels(const Dataset& d);

/// Throws DataError on a prediction id not in gold, a repeated prediction id,
/// or a gold id without a prediction.
ConfusionMatrix confusion(const std::map<std::string, int>& gold, std::span<const PredictionRecord> preds);

/// Throws DataError on an empty matrix.
EvalReport metrics(const ConfusionMatrix& cm, std::optional<std::string> slice = std::nullopt);

/// One report per slice tag (sorted by tag) over that tag's ids only.
/// Every gold id needs a tag.
std::vector<EvalReport> slice_report(const std::map<std::string, int>& gold, std::span<const PredictionRecord> preds,
                                     const std::map<std::string, std::string>& slices);

/// Slice map JSONL: {"id", "slice"}.
std::map<std::string, std::string> read_slices(const std::filesystem::path& path);

enum class ReportFormat { text_table, json, csv };

/// Parses "text", "table", "json" or "csv".
ReportFormat parse_report_format(std::string_view name);

/// Exact decimal rendering of a ratio with round-half-even. 0/0 renders as 0.
std::string format_ratio(const Ratio& r, int decimals);

/// text_table: rows ¬Def / Def / macro, columns Prec. Rec. F1 Support Acc.
/// json: array of report objects (full precision). csv: one header line plus
/// three rows per report.
std::string render(std::span<const EvalReport> reports, ReportFormat format, int decimals = 3);
std::string render(const EvalReport& report, ReportFormat format, int decimals = 3);

/// Summary table with one row per named report (Accuracy / Precision / Recall
/// / F1 / Support, positive class, plus macro columns).
std::string render_summary(std::span<const std::pair<std::string, EvalReport>> rows, int decimals = 3);

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace mathdef
