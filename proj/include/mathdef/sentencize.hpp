#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mathdef/latex_clean.hpp"

namespace mathdef {

enum class TokenKind { word, math, number, punct, placeholder };

std::string_view to_string(TokenKind kind);

struct Token {
    std::string text;
    TokenKind kind = TokenKind::word;
    std::size_t begin = 0;  // byte range in the tokenized text
    std::size_t end = 0;

    friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;  // detokenized, placeholders restored to "!"
    std::vector<Token> tokens;
    std::size_t span_begin = 0;  // byte range into the document's cleaned_text
    std::size_t span_end = 0;

    std::string id() const { return doc_id + "#" + std::to_string(index); }

    friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Abbreviations (with their trailing period) that never end a sentence.
/// Matched case-insensitively.
std::set<std::string> default_abbreviations();

/// One abbreviation per line; blank lines and '#' comments skipped.
std::set<std::string> load_abbreviations(const std::filesystem::path& path);

/// A manual correction applied after rule-based segmentation. `id` names a
/// sentence as produced by the rules, before any override renumbering.
struct SentenceOverride {
    enum class Action { split_before_token, merge_next };
    std::string id;
    Action action = Action::merge_next;
    std::size_t token = 0;  // for split_before_token
};

/// JSONL rows {"id":…, "split_before_token": k} or {"id":…, "merge_next": true}.
std::vector<SentenceOverride> load_overrides(const std::filesystem::path& path);

struct SentencizeOptions {
    std::set<std::string> abbreviations = default_abbreviations();
    std::vector<SentenceOverride> overrides;
};

/// Math regions become single tokens; the rest splits on whitespace with
/// leading brackets/quotes and trailing punctuation peeled into punct tokens.
/// Decimal numbers stay whole. Throws DataError on an unbalanced "$".
std::vector<Token> tokenize(std::string_view cleaned_text);
inline std::vector<Token> tokenize(const CleanDocument& doc) { return tokenize(doc.cleaned_text); }

/// Like tokenize, but text with unbalanced "$" is tokenized without math
/// regions instead of failing.
std::vector<Token> tokenize_lenient(std::string_view text);

/// Boundaries after "." / "?" / "!" / restored placeholders, except a "."
/// that closes a listed abbreviation or is followed by a lowercase word.
/// Sentences with fewer than two tokens merge forward.
std::vector<Sentence> split_sentences(const std::vector<Token>& tokens, const CleanDocument& doc,
                                      const SentencizeOptions& opts = {});

/// tokenize + split_sentences.
std::vector<Sentence> sentencize(const CleanDocument& doc, const SentencizeOptions& opts = {});

/// {"id":"<doc_id>#<index>", "doc_id":…, "text":…, "n_tokens":…}
nlohmann::json to_json(const Sentence& s);

}  // namespace mathdef
