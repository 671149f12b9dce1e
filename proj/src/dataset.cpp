#include "mathdef/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mathdef/error.hpp"
#include "mathdef/jsonl.hpp"
#include "mathdef/sentencize.hpp"
#include "mathdef/utf8.hpp"
#include "rng.hpp"

namespace mathdef {

std::size_t Dataset::positives() const {
    return static_cast<std::size_t>(
        std::count_if(examples.begin(), examples.end(), [](const LabeledExample& e) { return e.label == 1; }));
}

Density density(const Dataset& d) { return {d.positives(), d.size()}; }

Dataset attach_labels(std::span<const TextRecord> sentences, const std::map<std::string, int>& annotations,
                      const std::string& corpus, const std::string& name) {
    Dataset d;
    d.meta.name = name;
    std::set<std::string> seen;
    for (const auto& s : sentences) {
        if (!seen.insert(s.id).second) throw DataError("duplicate sentence id " + s.id);
        auto it = annotations.find(s.id);
        if (it == annotations.end()) throw DataError("sentence " + s.id + " has no label");
        if (it->second != 0 && it->second != 1) {
            throw DataError("label for " + s.id + " must be 0 or 1");
        }
        d.examples.push_back({s.id, s.text, it->second, corpus, std::nullopt});
    }
    for (const auto& [id, label] : annotations) {
        if (!seen.count(id)) throw DataError("annotation for unknown sentence id " + id);
    }
    return d;
}

Dataset attach_labels(std::span<const Sentence> sentences, const std::map<std::string, int>& annotations,
                      const std::string& corpus, const std::string& name) {
    std::vector<TextRecord> records;
    records.reserve(sentences.size());
    for (const auto& s : sentences) records.push_back({s.id(), s.text});
    return attach_labels(std::span<const TextRecord>(records), annotations, corpus, name);
}

Dataset combine(std::span<const Dataset> parts, const std::string& name) {
    Dataset out;
    out.meta.name = name;
    std::set<std::string> ids;
    for (const auto& part : parts) {
        out.meta.created_from.push_back(part.meta.name);
        for (const auto& ex : part.examples) {
            if (!ids.insert(ex.id).second) {
                throw DataError("id " + ex.id + " occurs in more than one input (" + part.meta.name + ")");
            }
            out.examples.push_back(ex);
        }
    }
    return out;
}

namespace {

Dataset subset(const Dataset& d, const std::vector<std::size_t>& sorted_indices, const std::string& suffix) {
    Dataset out;
    out.meta = d.meta;
    out.meta.name = d.meta.name + suffix;
    out.meta.created_from = {d.meta.name};
    out.examples.reserve(sorted_indices.size());
    for (auto i : sorted_indices) out.examples.push_back(d.examples[i]);
    return out;
}

// p as num/den with den a power of ten (at most 9 digits), reduced.
std::pair<std::uint64_t, std::uint64_t> decimal_rational(double p) {
    std::uint64_t den = 1;
    std::uint64_t num = 0;
    for (int digits = 0; digits <= 9; ++digits, den *= 10) {
        num = static_cast<std::uint64_t>(std::llround(p * static_cast<double>(den)));
        if (std::fabs(static_cast<double>(num) / static_cast<double>(den) - p) <= 1e-12) break;
        if (digits == 9) break;
    }
    const auto g = std::gcd(num, den);
    return {num / g, den / g};
}

}  // namespace

SplitResult split(const Dataset& d, double val_fraction, std::uint64_t seed, bool stratified) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw DataError("validation fraction must lie strictly between 0 and 1");
    }
    for (const auto& ex : d.examples) {
        if (ex.duplicate_of) {
            throw DataError("dataset contains oversampling copies (" + ex.id +
                            "); split before oversampling so copies never reach the validation set");
        }
    }
    const std::size_t n = d.size();
    const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
    if (n_val == 0 || n_val >= n) {
        throw DataError("dataset of " + std::to_string(n) + " examples is too small for a " +
                        std::to_string(val_fraction) + " validation split");
    }
    detail::Rng rng(seed);
    std::vector<std::size_t> val;

    if (stratified) {
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < n; ++i) (d.examples[i].label == 1 ? pos : neg).push_back(i);
        auto val_pos = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(pos.size())));
        val_pos = std::min({val_pos, pos.size(), n_val});
        const std::size_t val_neg = std::min(n_val - val_pos, neg.size());
        val_pos = n_val - val_neg;
        rng.shuffle(std::span<std::size_t>(pos));
        rng.shuffle(std::span<std::size_t>(neg));
        val.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(val_pos));
        val.insert(val.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(val_neg));
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(order));
        val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    }
    std::sort(val.begin(), val.end());

    std::vector<std::size_t> train;
    train.reserve(n - n_val);
    std::size_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (v < val.size() && val[v] == i) {
            ++v;
        } else {
            train.push_back(i);
        }
    }
    SplitResult out{subset(d, train, ".train"), subset(d, val, ".val")};
    out.train.meta.seed = out.val.meta.seed = seed;
    return out;
}

std::size_t min_positives_for_density(std::size_t negatives, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DataError("target density must lie strictly between 0 and 1");
    const auto [num, den] = decimal_rational(p);
    // n / (n + N) >= num / den  <=>  n * (den - num) >= num * N
    const auto need = static_cast<unsigned __int128>(num) * negatives;
    const auto step = static_cast<unsigned __int128>(den - num);
    return static_cast<std::size_t>((need + step - 1) / step);
}

Dataset oversample(const Dataset& train, OversampleMode mode, std::uint64_t seed) {
    const double target = mode.kind == OversampleMode::Kind::minority ? 0.5 : mode.target;
    std::vector<std::size_t> positives;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.examples[i].label == 1) positives.push_back(i);
    }
    const std::size_t negatives = train.size() - positives.size();
    if (positives.empty()) throw DataError("cannot oversample: dataset has no positive examples");

    const std::size_t needed = min_positives_for_density(negatives, target);
    if (positives.size() >= needed) {
        throw DataError("density is already at or above the target " + std::to_string(target) +
                        "; skip oversampling for this dataset");
    }
    if (positives.size() >= negatives) {
        throw DataError("positive class is not the minority; oversampling would only add definitions "
                        "beyond balance");
    }

    Dataset out = train;
    out.meta.name = train.meta.name + ".oversampled";
    out.meta.seed = seed;
    out.meta.created_from = {train.meta.name};

    std::set<std::string> ids;
    for (const auto& ex : train.examples) ids.insert(ex.id);

    detail::Rng rng(seed);
    const std::size_t copies = needed - positives.size();
    for (std::size_t k = 1; k <= copies; ++k) {
        const auto& source = train.examples[positives[rng.below(positives.size())]];
        std::string id = source.id + "#dup" + std::to_string(k);
        while (!ids.insert(id).second) id += "'";
        out.examples.push_back({std::move(id), source.text, source.label, source.corpus, source.id});
    }
    return out;
}

std::vector<LengthAuditEntry> length_audit(const Dataset& d, std::size_t max_len) {
    std::vector<LengthAuditEntry> out;
    for (const auto& ex : d.examples) {
        const auto len = utf8::code_points(ex.text);
        if (len > max_len) out.push_back({ex.id, len});
    }
    return out;
}

nlohmann::json to_json(const LabeledExample& ex) {
    return {{"id", ex.id},
            {"text", ex.text},
            {"label", ex.label},
            {"corpus", ex.corpus},
            {"origin", ex.duplicate_of ? "dup:" + *ex.duplicate_of : std::string("original")}};
}

LabeledExample example_from_json(const nlohmann::json& row, const std::string& where) {
    LabeledExample ex;
    ex.id = jsonl::require_string(row, "id", where);
    ex.text = jsonl::require_string(row, "text", where);
    const auto label = jsonl::require_int(row, "label", where);
    if (label != 0 && label != 1) throw DataError(where + ": label must be 0 or 1");
    ex.label = static_cast<int>(label);
    ex.corpus = row.contains("corpus") ? jsonl::require_string(row, "corpus", where) : std::string();
    const auto origin = row.contains("origin") ? jsonl::require_string(row, "origin", where) : "original";
    if (origin.rfind("dup:", 0) == 0) {
        ex.duplicate_of = origin.substr(4);
    } else if (origin != "original") {
        throw DataError(where + ": origin must be \"original\" or \"dup:<id>\"");
    }
    return ex;
}

void validate_duplicates(const Dataset& d) {
    std::map<std::string_view, const LabeledExample*> by_id;
    for (const auto& ex : d.examples) by_id.emplace(ex.id, &ex);
    for (const auto& ex : d.examples) {
        if (!ex.duplicate_of) continue;
        const auto it = by_id.find(*ex.duplicate_of);
        if (it == by_id.end() || it->second->duplicate_of) {
            throw DataError(d.meta.name + ": " + ex.id + " duplicates " + *ex.duplicate_of +
                            ", which is not an original example of this dataset");
        }
        if (it->second->text != ex.text || it->second->label != ex.label) {
            throw DataError(d.meta.name + ": " + ex.id + " differs from its source " + *ex.duplicate_of);
        }
    }
}

Dataset dataset_from_jsonl(std::string_view text, const std::string& name) {
    Dataset d;
    d.meta.name = name;
    const auto rows = jsonl::parse(text, name);
    std::set<std::string> ids;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto ex = example_from_json(rows[r], name + " record " + std::to_string(r + 1));
        if (!ids.insert(ex.id).second) throw DataError(name + ": duplicate id " + ex.id);
        d.examples.push_back(std::move(ex));
    }
    validate_duplicates(d);
    return d;
}

Dataset read_dataset(const std::filesystem::path& path) {
    auto d = dataset_from_jsonl(jsonl::read_text(path), path.string());
    d.meta.name = path.stem().string();
    return d;
}

std::string dataset_to_jsonl(const Dataset& d) {
    std::string out;
    for (const auto& ex : d.examples) {
        out += to_json(ex).dump();
        out += '\n';
    }
    return out;
}

std::map<std::string, int> read_annotations(const std::filesystem::path& path) {
    std::map<std::string, int> out;
    const auto rows = jsonl::read_file(path);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto where = path.string() + " record " + std::to_string(r + 1);
        const auto id = jsonl::require_string(rows[r], "id", where);
        const auto label = jsonl::require_int(rows[r], "label", where);
        if (label != 0 && label != 1) throw DataError(where + ": label must be 0 or 1");
        if (!out.emplace(id, static_cast<int>(label)).second) throw DataError(where + ": duplicate id " + id);
    }
    return out;
}

}  // namespace mathdef
