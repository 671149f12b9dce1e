#include "mathdef/evaluate.hpp"

#include <set>
#include <sstream>

#include "mathdef/error.hpp"
#include "mathdef/jsonl.hpp"
#include "mathdef/utf8.hpp"

namespace mathdef {

std::map<std::string, int> gold_labels(const Dataset& d) {
    std::map<std::string, int> gold;
    for (const auto& ex : d.examples) {
        if (!gold.emplace(ex.id, ex.label).second) throw DataError("duplicate gold id " + ex.id);
    }
    return gold;
}

ConfusionMatrix confusion(const std::map<std::string, int>& gold, std::span<const PredictionRecord> preds) {
    ConfusionMatrix cm;
    std::set<std::string_view> seen;
    for (const auto& p : preds) {
        auto it = gold.find(p.id);
        if (it == gold.end()) throw DataError("prediction for unknown id " + p.id);
        if (!seen.insert(p.id).second) throw DataError("duplicate prediction for id " + p.id);
        const bool gold_pos = it->second == 1;
        const bool pred_pos = p.label == 1;
        if (gold_pos && pred_pos) ++cm.tp;
        if (!gold_pos && pred_pos) ++cm.fp;
        if (!gold_pos && !pred_pos) ++cm.tn;
        if (gold_pos && !pred_pos) ++cm.fn;
    }
    if (seen.size() != gold.size()) {
        for (const auto& [id, label] : gold) {
            if (!seen.count(id)) throw DataError("no prediction for gold id " + id);
        }
    }
    return cm;
}

namespace {

ClassMetrics class_metrics(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    ClassMetrics m;
    m.precision = {tp, tp + fp};
    m.recall = {tp, tp + fn};
    m.f1 = {2 * tp, 2 * tp + fp + fn};
    m.support = tp + fn;
    return m;
}

}  // namespace

EvalReport metrics(const ConfusionMatrix& cm, std::optional<std::string> slice) {
    if (cm.total() == 0) throw DataError("cannot compute metrics over zero examples");
    EvalReport r;
    r.confusion = cm;
    r.def = class_metrics(cm.tp, cm.fp, cm.fn);
    // the negative class sees tn as its true positives
    r.not_def = class_metrics(cm.tn, cm.fn, cm.fp);
    r.accuracy = {cm.tp + cm.tn, cm.total()};
    r.slice = std::move(slice);
    return r;
}

std::vector<EvalReport> slice_report(const std::map<std::string, int>& gold, std::span<const PredictionRecord> preds,
                                     const std::map<std::string, std::string>& slices) {
    confusion(gold, preds);  // validates coverage before slicing

    std::map<std::string, std::map<std::string, int>> gold_by_tag;
    for (const auto& [id, label] : gold) {
        auto it = slices.find(id);
        if (it == slices.end()) throw DataError("id " + id + " has no slice tag");
        gold_by_tag[it->second].emplace(id, label);
    }
    std::map<std::string, std::vector<PredictionRecord>> preds_by_tag;
    for (const auto& p : preds) preds_by_tag[slices.at(p.id)].push_back(p);

    std::vector<EvalReport> out;
    for (const auto& [tag, sub_gold] : gold_by_tag) {
        out.push_back(metrics(confusion(sub_gold, preds_by_tag[tag]), tag));
    }
    return out;
}

std::map<std::string, std::string> read_slices(const std::filesystem::path& path) {
    std::map<std::string, std::string> out;
    const auto rows = jsonl::read_file(path);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto where = path.string() + " record " + std::to_string(r + 1);
        auto id = jsonl::require_string(rows[r], "id", where);
        auto tag = jsonl::require_string(rows[r], "slice", where);
        if (!out.emplace(std::move(id), std::move(tag)).second) throw DataError(where + ": duplicate id");
    }
    return out;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "text" || name == "table" || name == "text_table") return ReportFormat::text_table;
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    throw UsageError("unknown report format '" + std::string(name) + "' (text, json, csv)");
}

std::string format_ratio(const Ratio& r, int decimals) {
    using u128 = unsigned __int128;
    u128 scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    u128 q = 0;
    if (r.den != 0) {
        const u128 scaled = static_cast<u128>(r.num) * scale;
        q = scaled / r.den;
        const u128 twice_rem = 2 * (scaled % r.den);
        if (twice_rem > r.den || (twice_rem == r.den && (q % 2 == 1))) ++q;
    }
    const u128 whole = q / scale;
    u128 frac = q % scale;
    std::string frac_digits(static_cast<std::size_t>(decimals), '0');
    for (int i = decimals - 1; i >= 0; --i) {
        frac_digits[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac % 10));
        frac /= 10;
    }
    std::string out = std::to_string(static_cast<unsigned long long>(whole));
    if (decimals > 0) out += "." + frac_digits;
    return out;
}

namespace {

// Macro average of two ratios, exact; a 0/0 side counts as 0.
Ratio mean_of(const Ratio& a, const Ratio& b) {
    const std::uint64_t da = a.den ? a.den : 1;
    const std::uint64_t db = b.den ? b.den : 1;
    return {(a.den ? a.num : 0) * db + (b.den ? b.num : 0) * da, 2 * da * db};
}

std::string pad_to(std::string s, std::size_t width) {
    const auto cps = utf8::code_points(s);
    if (cps < width) s.append(width - cps, ' ');
    return s;
}

std::string cell(const Ratio& r, int decimals) { return format_ratio(r, decimals) + (r.degenerate() ? "*" : ""); }

void table_row(std::ostringstream& os, const std::string& label, const std::vector<std::string>& cells) {
    std::string line = pad_to(label, 8);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        line += i + 1 < cells.size() ? pad_to(cells[i], 9) : cells[i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
}

void render_table(std::ostringstream& os, const EvalReport& r, int decimals) {
    if (r.slice) os << "slice: " << *r.slice << '\n';
    table_row(os, "", {"Prec.", "Rec.", "F1", "Support", "Acc."});
    table_row(os, "¬Def:",
              {cell(r.not_def.precision, decimals), cell(r.not_def.recall, decimals), cell(r.not_def.f1, decimals),
               std::to_string(r.not_def.support)});
    table_row(os, "Def:",
              {cell(r.def.precision, decimals), cell(r.def.recall, decimals), cell(r.def.f1, decimals),
               std::to_string(r.def.support), format_ratio(r.accuracy, decimals)});
    table_row(os, "macro:",
              {format_ratio(mean_of(r.def.precision, r.not_def.precision), decimals),
               format_ratio(mean_of(r.def.recall, r.not_def.recall), decimals),
               format_ratio(mean_of(r.def.f1, r.not_def.f1), decimals), std::to_string(r.confusion.total())});
    const bool degenerate = r.def.precision.degenerate() || r.def.recall.degenerate() ||
                            r.def.f1.degenerate() || r.not_def.precision.degenerate() ||
                            r.not_def.recall.degenerate() || r.not_def.f1.degenerate();
    if (degenerate) os << "* 0/0, reported as 0\n";
}

nlohmann::json class_json(const ClassMetrics& m) {
    nlohmann::json degenerate = nlohmann::json::array();
    if (m.precision.degenerate()) degenerate.push_back("precision");
    if (m.recall.degenerate()) degenerate.push_back("recall");
    if (m.f1.degenerate()) degenerate.push_back("f1");
    return {{"precision", m.precision.value()},
            {"recall", m.recall.value()},
            {"f1", m.f1.value()},
            {"support", m.support},
            {"degenerate", std::move(degenerate)}};
}

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
    return {{"slice", r.slice ? nlohmann::json(*r.slice) : nlohmann::json(nullptr)},
            {"accuracy", r.accuracy.value()},
            {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}}},
            {"def", class_json(r.def)},
            {"not_def", class_json(r.not_def)},
            {"macro", {{"precision", r.macro_precision()}, {"recall", r.macro_recall()}, {"f1", r.macro_f1()}}}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    try {
        const auto& c = j.at("confusion");
        ConfusionMatrix cm{c.at("tp").get<std::uint64_t>(), c.at("fp").get<std::uint64_t>(),
                           c.at("tn").get<std::uint64_t>(), c.at("fn").get<std::uint64_t>()};
        std::optional<std::string> slice;
        if (j.contains("slice") && !j.at("slice").is_null()) slice = j.at("slice").get<std::string>();
        auto r = metrics(cm, slice);
        // the stored numbers must agree with the counts they claim to summarize
        if (j.at("accuracy").get<double>() != r.accuracy.value() ||
            j.at("def").at("precision").get<double>() != r.def.precision.value() ||
            j.at("def").at("recall").get<double>() != r.def.recall.value()) {
            throw DataError("report values disagree with its confusion counts");
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

std::string render(std::span<const EvalReport> reports, ReportFormat format, int decimals) {
    std::ostringstream os;
    switch (format) {
        case ReportFormat::text_table:
            for (std::size_t i = 0; i < reports.size(); ++i) {
                if (i) os << '\n';
                render_table(os, reports[i], decimals);
            }
            break;
        case ReportFormat::json: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& r : reports) arr.push_back(to_json(r));
            os << arr.dump(2) << '\n';
            break;
        }
        case ReportFormat::csv:
            os << "slice,class,precision,recall,f1,support,accuracy\n";
            for (const auto& r : reports) {
                const std::string slice = r.slice.value_or("");
                const auto acc = format_ratio(r.accuracy, decimals);
                auto row = [&](const char* name, const Ratio& p, const Ratio& rc, const Ratio& f, std::uint64_t s) {
                    os << slice << ',' << name << ',' << format_ratio(p, decimals) << ',' << format_ratio(rc, decimals)
                       << ',' << format_ratio(f, decimals) << ',' << s << ',' << acc << '\n';
                };
                row("not_def", r.not_def.precision, r.not_def.recall, r.not_def.f1, r.not_def.support);
                row("def", r.def.precision, r.def.recall, r.def.f1, r.def.support);
                row("macro", mean_of(r.def.precision, r.not_def.precision), mean_of(r.def.recall, r.not_def.recall),
                    mean_of(r.def.f1, r.not_def.f1), r.confusion.total());
            }
            break;
    }
    return os.str();
}

std::string render(const EvalReport& report, ReportFormat format, int decimals) {
    if (format == ReportFormat::json) return to_json(report).dump(2) + "\n";
    return render(std::span<const EvalReport>(&report, 1), format, decimals);
}

std::string render_summary(std::span<const std::pair<std::string, EvalReport>> rows, int decimals) {
    std::ostringstream os;
    std::size_t name_width = 8;
    for (const auto& [name, r] : rows) name_width = std::max(name_width, utf8::code_points(name) + 2);
    auto line = [&](const std::vector<std::string>& cells) {
        std::string s = pad_to(cells[0], name_width);
        for (std::size_t i = 1; i < cells.size(); ++i) s += i + 1 < cells.size() ? pad_to(cells[i], 11) : cells[i];
        os << s << '\n';
    };
    line({"Dataset", "Accuracy", "Precision", "Recall", "F1", "Support", "Macro-P", "Macro-R", "Macro-F1"});
    for (const auto& [name, r] : rows) {
        line({name, format_ratio(r.accuracy, decimals), cell(r.def.precision, decimals), cell(r.def.recall, decimals),
              cell(r.def.f1, decimals), std::to_string(r.def.support),
              format_ratio(mean_of(r.def.precision, r.not_def.precision), decimals),
              format_ratio(mean_of(r.def.recall, r.not_def.recall), decimals),
              format_ratio(mean_of(r.def.f1, r.not_def.f1), decimals)});
    }
    return os.str();
}

}  // namespace mathdef
