#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mathdef/corpus.hpp"
#include "mathdef/kv_config.hpp"

namespace mathdef {

/// Which LaTeX commands and environments strip_formatting touches.
///
/// Entries in `remove` ending in '*' match both the plain and the starred
/// command (`section*` matches `\section` and `\section*`). Environment names
/// match exactly.
struct StripConfig {
    std::set<std::string> unwrap{"textbf", "textit", "emph", "underline"};
    std::set<std::string> remove{"cite*",    "citep*",         "citet*",   "label",
                                 "section*", "subsection*", "subsubsection*", "chapter*"};
    std::set<std::string> environments{"align", "align*", "equation", "equation*", "gather"};
    std::string row_separator = "; ";
};

struct CleanConfig {
    StripConfig strip;
    /// Sentence punctuation moved from the end of a math region to just after it.
    std::string relocated_punctuation = ".,;:?";

    /// Keys: strip.unwrap, strip.delete, strip.environments (comma lists),
    /// strip.row_separator, relocate.punctuation. Missing keys keep defaults.
    static CleanConfig from(const KeyValueConfig& kv);
};

/// Byte range [begin, end) of one "$...$" region, dollars included.
struct MathSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    friend bool operator==(const MathSpan&, const MathSpan&) = default;
};

struct CleanDocument {
    std::string id;
    CorpusTag corpus_tag = CorpusTag::plain;
    std::string cleaned_text;
    std::vector<MathSpan> math_spans;
    /// Offsets into cleaned_text where an inserted "clik" begins.
    std::vector<std::size_t> placeholder_positions;

    friend bool operator==(const CleanDocument&, const CleanDocument&) = default;
};

inline constexpr std::string_view kPlaceholder = "clik";

/// Rewrites \(..\), \[..\] and $$..$$ as $..$ leaving the interior
/// byte-identical. Throws DataError at the dangling opener (or stray closer).
std::string normalize_delimiters(std::string_view text);

/// Moves trailing sentence punctuation out of each math region:
/// "so $x+y.$" -> "so $x+y$.".
std::string relocate_punctuation(std::string_view text, std::string_view punctuation = ".,;:?");

/// Pads hyphen runs outside math with single spaces: "$G$-space" -> "$G$ - space".
std::string pad_hyphens(std::string_view text);

struct PlaceholderResult {
    std::string text;
    std::vector<std::size_t> positions;
};

/// Replaces each "!" outside math with " clik". Factorials inside math stay.
PlaceholderResult placeholder_exclamations(std::string_view text);

/// Removes formatting markup outside math: unwraps \textbf{..} and friends,
/// deletes headers/citations/labels, turns listed display environments into
/// "$row; row$". For markdown_concepts also drops Markdown emphasis, heading
/// lines, and resolves [[target|shown]] -> shown, [[target]] -> target.
std::string strip_formatting(std::string_view text, CorpusTag tag, const StripConfig& cfg = {});

/// strip_formatting -> normalize_delimiters -> relocate_punctuation ->
/// pad_hyphens -> placeholder_exclamations. Errors carry the document id.
CleanDocument clean(const RawDocument& doc, const CleanConfig& cfg = {});

/// Math regions of delimiter-normalized text. "\$" is a literal dollar, and a
/// "$" nested inside braces within math does not close the region.
/// Throws DataError on an unterminated region.
std::vector<MathSpan> find_math_spans(std::string_view text);

}  // namespace mathdef
