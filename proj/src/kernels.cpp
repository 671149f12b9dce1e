#include "mathdef/kernels.hpp"

#include "parallel_for.hpp"

namespace mathdef::kernels {
namespace {

// Each kernel is written once over a loop policy so the parallel and serial
// variants cannot drift apart in what they compute.
template <typename Loop>
std::vector<CleanDocument> clean_with(Loop loop, std::span<const RawDocument> docs, const CleanConfig& cfg) {
    std::vector<CleanDocument> out(docs.size());
    loop(docs.size(), [&](std::size_t i) { out[i] = clean(docs[i], cfg); });
    return out;
}

template <typename Loop>
std::vector<std::vector<Sentence>> sentencize_with(Loop loop, std::span<const CleanDocument> docs,
                                                   const SentencizeOptions& opts) {
    std::vector<std::vector<Sentence>> out(docs.size());
    loop(docs.size(), [&](std::size_t i) { out[i] = sentencize(docs[i], opts); });
    return out;
}

template <typename Loop>
std::vector<SparseVector> featurize_with(Loop loop, std::span<const std::string_view> texts,
                                         const BaselineConfig& cfg) {
    std::vector<SparseVector> out(texts.size());
    loop(texts.size(), [&](std::size_t i) { out[i] = featurize(texts[i], cfg); });
    return out;
}

template <typename Loop>
std::vector<double> score_with(Loop loop, const BaselineModel& model, std::span<const SparseVector> features) {
    std::vector<double> out(features.size());
    loop(features.size(), [&](std::size_t i) { out[i] = sigmoid(model.margin(features[i])); });
    return out;
}

const auto parallel = [](std::size_t n, auto&& fn) { detail::parallel_for(n, fn); };
const auto sequential = [](std::size_t n, auto&& fn) { detail::serial_for(n, fn); };

}  // namespace

std::vector<CleanDocument> clean_all(std::span<const RawDocument> docs, const CleanConfig& cfg) {
    return clean_with(parallel, docs, cfg);
}
std::vector<std::vector<Sentence>> sentencize_all(std::span<const CleanDocument> docs,
                                                  const SentencizeOptions& opts) {
    return sentencize_with(parallel, docs, opts);
}
std::vector<SparseVector> featurize_all(std::span<const std::string_view> texts, const BaselineConfig& cfg) {
    return featurize_with(parallel, texts, cfg);
}
std::vector<double> score_all(const BaselineModel& model, std::span<const SparseVector> features) {
    return score_with(parallel, model, features);
}

namespace serial {

std::vector<CleanDocument> clean_all(std::span<const RawDocument> docs, const CleanConfig& cfg) {
    return clean_with(sequential, docs, cfg);
}
std::vector<std::vector<Sentence>> sentencize_all(std::span<const CleanDocument> docs,
                                                  const SentencizeOptions& opts) {
    return sentencize_with(sequential, docs, opts);
}
std::vector<SparseVector> featurize_all(std::span<const std::string_view> texts, const BaselineConfig& cfg) {
    return featurize_with(sequential, texts, cfg);
}
std::vector<double> score_all(const BaselineModel& model, std::span<const SparseVector> features) {
    return score_with(sequential, model, features);
}

}  // namespace serial
}  // namespace mathdef::kernels
