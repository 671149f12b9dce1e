#include <benchmark/benchmark.h>

#include "mathdef/kernels.hpp"
#include "support.hpp"

using namespace mathdef;

namespace {

std::vector<RawDocument> docs(std::size_t n) {
    testsupport::Gen g(1);
    std::vector<RawDocument> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto c = testsupport::latex_case(g);
        // longer documents, closer to an abstract
        for (int k = 0; k < 6; ++k) c.raw += " " + testsupport::latex_case(g).raw;
        out.push_back({"d" + std::to_string(i), "d" + std::to_string(i), CorpusTag::latex_abstracts, c.raw});
    }
    return out;
}

const std::vector<RawDocument>& raw_batch() {
    static const auto batch = docs(2000);
    return batch;
}

const std::vector<CleanDocument>& clean_batch() {
    static const auto batch = kernels::serial::clean_all(raw_batch());
    return batch;
}

const std::vector<std::string>& sentence_texts() {
    static const auto texts = [] {
        std::vector<std::string> out;
        for (const auto& per_doc : kernels::serial::sentencize_all(clean_batch())) {
            for (const auto& s : per_doc) out.push_back(s.text);
        }
        return out;
    }();
    return texts;
}

template <auto Fn>
void BM_clean(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(Fn(raw_batch(), CleanConfig{}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(raw_batch().size()));
}

template <auto Fn>
void BM_sentencize(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(Fn(clean_batch(), SentencizeOptions{}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(clean_batch().size()));
}

template <auto Fn>
void BM_featurize(benchmark::State& state) {
    const std::vector<std::string_view> views(sentence_texts().begin(), sentence_texts().end());
    const BaselineConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(Fn(views, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(views.size()));
}

}  // namespace

BENCHMARK(BM_clean<kernels::serial::clean_all>)->Name("clean/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_clean<kernels::clean_all>)->Name("clean/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_sentencize<kernels::serial::sentencize_all>)->Name("sentencize/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sentencize<kernels::sentencize_all>)->Name("sentencize/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_featurize<kernels::serial::featurize_all>)->Name("featurize/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_featurize<kernels::featurize_all>)->Name("featurize/omp")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
