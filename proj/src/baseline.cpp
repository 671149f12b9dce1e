#include "mathdef/baseline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "mathdef/error.hpp"
#include "mathdef/jsonl.hpp"
#include "mathdef/kernels.hpp"
#include "mathdef/sentencize.hpp"
#include "rng.hpp"
#include "text_util.hpp"

namespace mathdef {
namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// splitmix64 finalizer: decorrelates the sign bit from the bucket bits.
std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

double squared_norm(const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) s += v * v;
    return s;
}

}  // namespace

void BaselineConfig::validate() const {
    if (dim == 0 || !std::has_single_bit(dim)) throw DataError("dim must be a power of two");
    if (ngram_min < 1 || ngram_max < ngram_min) throw DataError("need 1 <= ngram_min <= ngram_max");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw DataError("lr must be positive");
    if (!(l2 >= 0.0)) throw DataError("l2 must be non-negative");
    if (epochs < 1) throw DataError("epochs must be >= 1");
    if (batch_size < 1) throw DataError("batch_size must be >= 1");
}

const std::vector<std::string>& cue_phrases() {
    static const std::vector<std::string> cues{"is called", "we say", "is defined", "if and only if", "we call"};
    return cues;
}

SparseVector featurize(std::string_view sentence_text, const BaselineConfig& cfg) {
    const auto tokens = tokenize_lenient(sentence_text);
    if (tokens.empty()) return {};

    std::vector<std::string> words;
    words.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (t.kind == TokenKind::math) {
            words.emplace_back(kMathSymbol);
        } else if (t.kind == TokenKind::placeholder) {
            words.emplace_back("!");
        } else {
            words.push_back(to_lower_ascii(t.text));
        }
    }

    std::vector<SparseEntry> raw;
    const std::uint32_t mask = cfg.dim - 1;
    auto add = [&](const std::string& feature) {
        const auto h = fnv1a(feature);
        const double sign = (mix(h) >> 63) ? -1.0 : 1.0;
        raw.push_back({static_cast<std::uint32_t>(h & mask), sign});
    };

    for (int n = cfg.ngram_min; n <= cfg.ngram_max; ++n) {
        const auto len = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i + len <= words.size(); ++i) {
            std::string gram = "ng:" + words[i];
            for (std::size_t k = 1; k < len; ++k) gram += ' ' + words[i + k];
            add(gram);
        }
    }

    std::string joined = " ";
    for (const auto& w : words) joined += w + ' ';
    for (const auto& cue : cue_phrases()) {
        if (joined.find(' ' + cue + ' ') != std::string::npos) add("cue:" + cue);
    }
    const int bucket = std::min(7, static_cast<int>(std::bit_width(words.size())) - 1);
    add("len:" + std::to_string(bucket));

    std::sort(raw.begin(), raw.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    SparseVector out;
    for (const auto& e : raw) {
        if (!out.empty() && out.back().index == e.index) {
            out.back().value += e.value;
        } else {
            out.push_back(e);
        }
    }
    std::erase_if(out, [](const SparseEntry& e) { return e.value == 0.0; });
    return out;
}

BaselineModel BaselineModel::zeros(const BaselineConfig& cfg) {
    cfg.validate();
    return {cfg, std::vector<double>(cfg.dim, 0.0), 0.0};
}

double BaselineModel::margin(const SparseVector& x) const {
    double z = bias;
    for (const auto& e : x) z += weights[e.index] * e.value;
    return z;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> LossGradient::full_grad(const BaselineModel& m) const {
    std::vector<double> g = data_grad;
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += m.config.l2 * m.weights[j];
    return g;
}

namespace {

LossGradient batch_gradient(const BaselineModel& model, std::span<const SparseVector> features,
                            std::span<const int> labels, std::span<const std::size_t> batch) {
    LossGradient out;
    out.data_grad.assign(model.weights.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (auto i : batch) {
        const double z = model.margin(features[i]);
        const double y = labels[i];
        loss += softplus(z) - y * z;
        const double residual = (sigmoid(z) - y) * inv;
        for (const auto& e : features[i]) out.data_grad[e.index] += residual * e.value;
        out.bias_grad += residual;
    }
    out.loss = loss * inv + 0.5 * model.config.l2 * squared_norm(model.weights);
    return out;
}

void check_inputs(const BaselineModel& model, std::span<const SparseVector> features, std::span<const int> labels) {
    if (features.size() != labels.size()) throw DataError("features and labels differ in length");
    if (features.empty()) throw DataError("empty batch");
    for (const auto& x : features) {
        for (const auto& e : x) {
            if (e.index >= model.weights.size()) throw DataError("feature index outside model dimension");
        }
    }
}

}  // namespace

LossGradient loss_and_gradient(const BaselineModel& model, std::span<const SparseVector> features,
                               std::span<const int> labels) {
    check_inputs(model, features, labels);
    std::vector<std::size_t> all(features.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return batch_gradient(model, features, labels, all);
}

double objective(const BaselineModel& model, std::span<const SparseVector> features, std::span<const int> labels) {
    check_inputs(model, features, labels);
    double loss = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double z = model.margin(features[i]);
        loss += softplus(z) - labels[i] * z;
    }
    return loss / static_cast<double>(features.size()) + 0.5 * model.config.l2 * squared_norm(model.weights);
}

TrainResult train(const Dataset& train_set, const BaselineConfig& config) {
    config.validate();
    if (train_set.size() == 0) throw DataError("training set is empty");
    const auto pos = train_set.positives();
    if (pos == 0 || pos == train_set.size()) throw DataError("training set must contain both classes");

    std::vector<std::string_view> texts;
    std::vector<int> labels;
    for (const auto& ex : train_set.examples) {
        texts.push_back(ex.text);
        labels.push_back(ex.label);
    }
    const auto features = kernels::featurize_all(texts, config);

    TrainResult result{BaselineModel::zeros(config), {}};
    auto& model = result.model;
    result.loss_trace.push_back(objective(model, features, labels));

    detail::Rng rng(config.seed);
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto batch = static_cast<std::size_t>(config.batch_size);
    // Proximal step for the L2 term: stable for any lr * l2.
    const double shrink = 1.0 / (1.0 + config.lr * config.l2);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const auto stop = std::min(order.size(), start + batch);
            const auto g = batch_gradient(model, features, labels,
                                          std::span<const std::size_t>(order).subspan(start, stop - start));
            for (std::size_t j = 0; j < model.weights.size(); ++j) {
                model.weights[j] = (model.weights[j] - config.lr * g.data_grad[j]) * shrink;
            }
            model.bias -= config.lr * g.bias_grad;
        }
        const double loss = objective(model, features, labels);
        if (!std::isfinite(loss)) {
            throw DataError("training diverged (non-finite loss in epoch " + std::to_string(epoch) +
                            "); try a smaller learning rate");
        }
        result.loss_trace.push_back(loss);
    }
    return result;
}

std::vector<PredictionRecord> predict(const BaselineModel& model, std::span<const TextRecord> items,
                                      double threshold) {
    std::vector<std::string_view> texts;
    texts.reserve(items.size());
    for (const auto& it : items) texts.push_back(it.text);
    const auto features = kernels::featurize_all(texts, model.config);
    const auto scores = kernels::score_all(model, features);
    std::vector<PredictionRecord> out;
    out.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        out.push_back({items[i].id, scores[i], scores[i] >= threshold ? 1 : 0});
    }
    return out;
}

std::vector<PredictionRecord> predict(const BaselineModel& model, const Dataset& ds, double threshold) {
    std::vector<TextRecord> items;
    items.reserve(ds.size());
    for (const auto& ex : ds.examples) items.push_back({ex.id, ex.text});
    return predict(model, std::span<const TextRecord>(items), threshold);
}

nlohmann::json to_json(const BaselineModel& model) {
    const auto& c = model.config;
    nlohmann::json weights = nlohmann::json::array();
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        if (model.weights[j] != 0.0) weights.push_back({j, model.weights[j]});
    }
    return {{"format", "mathdef-baseline"},
            {"version", 1},
            {"config",
             {{"dim", c.dim},
              {"ngram_min", c.ngram_min},
              {"ngram_max", c.ngram_max},
              {"lr", c.lr},
              {"l2", c.l2},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed}}},
            {"bias", model.bias},
            {"weights", std::move(weights)}};
}

BaselineModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "mathdef-baseline" || j.at("version") != 1) {
            throw DataError("not a mathdef-baseline v1 model");
        }
        const auto& c = j.at("config");
        BaselineConfig cfg;
        cfg.dim = c.at("dim").get<std::uint32_t>();
        cfg.ngram_min = c.at("ngram_min").get<int>();
        cfg.ngram_max = c.at("ngram_max").get<int>();
        cfg.lr = c.at("lr").get<double>();
        cfg.l2 = c.at("l2").get<double>();
        cfg.epochs = c.at("epochs").get<int>();
        cfg.batch_size = c.at("batch_size").get<int>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
        auto model = BaselineModel::zeros(cfg);
        model.bias = j.at("bias").get<double>();
        for (const auto& entry : j.at("weights")) {
            const auto idx = entry.at(0).get<std::size_t>();
            if (idx >= model.weights.size()) throw DataError("weight index outside model dimension");
            model.weights[idx] = entry.at(1).get<double>();
        }
        if (!std::isfinite(model.bias) ||
            !std::all_of(model.weights.begin(), model.weights.end(), [](double w) { return std::isfinite(w); })) {
            throw DataError("model contains non-finite parameters");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const BaselineModel& model, const std::filesystem::path& path) {
    jsonl::write_file_atomic(path, to_json(model).dump() + "\n");
}

BaselineModel load_model(const std::filesystem::path& path) {
    const auto text = jsonl::read_text(path);
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DataError(path.string() + ": not valid JSON");
    try {
        return model_from_json(j);
    } catch (const DataError& e) {
        throw e.with_context(path.string());
    }
}

nlohmann::json to_json(const PredictionRecord& p) {
    return {{"id", p.id}, {"score", p.score}, {"label", p.label}};
}

std::vector<PredictionRecord> predictions_from_jsonl(std::string_view text, const std::string& source) {
    std::vector<PredictionRecord> out;
    const auto rows = jsonl::parse(text, source);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto where = source + " record " + std::to_string(r + 1);
        PredictionRecord p;
        p.id = jsonl::require_string(rows[r], "id", where);
        p.score = jsonl::require_number(rows[r], "score", where);
        const auto label = jsonl::require_int(rows[r], "label", where);
        if (label != 0 && label != 1) throw DataError(where + ": label must be 0 or 1");
        if (!(p.score >= 0.0 && p.score <= 1.0)) throw DataError(where + ": score must lie in [0, 1]");
        p.label = static_cast<int>(label);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
    return predictions_from_jsonl(jsonl::read_text(path), path.string());
}

}  // namespace mathdef
