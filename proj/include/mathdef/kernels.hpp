#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "mathdef/baseline.hpp"
#include "mathdef/corpus.hpp"
#include "mathdef/latex_clean.hpp"
#include "mathdef/sentencize.hpp"

/// Batch kernels over independent documents / sentences.
///
/// `mathdef::kernels` runs the per-item work under OpenMP; the functions in
/// `mathdef::kernels::serial` are the plain-loop reference implementations the
/// tests compare against. Both produce identical output for identical input,
/// and both report the failure of the lowest-index item when something throws.
namespace mathdef::kernels {

std::vector<CleanDocument> clean_all(std::span<const RawDocument> docs, const CleanConfig& cfg = {});
std::vector<std::vector<Sentence>> sentencize_all(std::span<const CleanDocument> docs,
                                                  const SentencizeOptions& opts = {});
std::vector<SparseVector> featurize_all(std::span<const std::string_view> texts, const BaselineConfig& cfg);
std::vector<double> score_all(const BaselineModel& model, std::span<const SparseVector> features);

namespace serial {

std::vector<CleanDocument> clean_all(std::span<const RawDocument> docs, const CleanConfig& cfg = {});
std::vector<std::vector<Sentence>> sentencize_all(std::span<const CleanDocument> docs,
                                                  const SentencizeOptions& opts = {});
std::vector<SparseVector> featurize_all(std::span<const std::string_view> texts, const BaselineConfig& cfg);
std::vector<double> score_all(const BaselineModel& model, std::span<const SparseVector> features);

}  // namespace serial
}  // namespace mathdef::kernels
