#include "mathdef/sentencize.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <optional>
#include <utility>

#include "mathdef/error.hpp"
#include "mathdef/jsonl.hpp"
#include "text_util.hpp"

namespace mathdef {

std::string_view to_string(TokenKind kind) {
    switch (kind) {
        case TokenKind::word: return "word";
        case TokenKind::math: return "math";
        case TokenKind::number: return "number";
        case TokenKind::punct: return "punct";
        case TokenKind::placeholder: return "placeholder";
    }
    return "word";
}

std::set<std::string> default_abbreviations() {
    return {"i.e.", "e.g.", "cf.",  "etc.", "resp.", "dr.",  "prof.", "vs.",
            "thm.", "def.", "prop.", "lem.", "cor.",  "fig.", "eq."};
}

std::set<std::string> load_abbreviations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read abbreviation list " + path.string());
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.insert(to_lower_ascii(t));
    }
    return out;
}

std::vector<SentenceOverride> load_overrides(const std::filesystem::path& path) {
    std::vector<SentenceOverride> out;
    const auto rows = jsonl::read_file(path);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto where = path.string() + " record " + std::to_string(r + 1);
        SentenceOverride o;
        o.id = jsonl::require_string(rows[r], "id", where);
        if (rows[r].contains("split_before_token")) {
            const auto k = jsonl::require_int(rows[r], "split_before_token", where);
            if (k < 1) throw DataError(where + ": split_before_token must be >= 1");
            o.action = SentenceOverride::Action::split_before_token;
            o.token = static_cast<std::size_t>(k);
        } else if (rows[r].value("merge_next", false)) {
            o.action = SentenceOverride::Action::merge_next;
        } else {
            throw DataError(where + ": expected split_before_token or merge_next");
        }
        out.push_back(std::move(o));
    }
    return out;
}

namespace {

constexpr const char* kOpeners = "([{\"'`";
constexpr const char* kTrailing = ".,;:?!)]}\"'";

bool in_set(const char* set, char c) { return c != '\0' && std::strchr(set, c) != nullptr; }

bool is_number(std::string_view s) {
    std::size_t i = 0;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) i = 1;
    if (i >= s.size() || !is_ascii_digit(s[i]) || !is_ascii_digit(s.back())) return false;
    for (; i < s.size(); ++i) {
        if (!is_ascii_digit(s[i]) && s[i] != '.' && s[i] != ',') return false;
    }
    return true;
}

TokenKind classify(std::string_view s) {
    if (s == kPlaceholder) return TokenKind::placeholder;
    if (is_number(s)) return TokenKind::number;
    const bool all_punct = std::all_of(s.begin(), s.end(), [](char c) {
        return static_cast<unsigned char>(c) < 0x80 && !is_ascii_alnum(c) && !is_space(c);
    });
    return all_punct ? TokenKind::punct : TokenKind::word;
}

void push(std::vector<Token>& out, std::string_view text, std::size_t b, std::size_t e, TokenKind kind) {
    out.push_back(Token{std::string(text.substr(b, e - b)), kind, b, e});
}

void tokenize_plain(std::string_view text, std::size_t b, std::size_t e, std::vector<Token>& out) {
    std::size_t i = b;
    while (i < e) {
        while (i < e && is_space(text[i])) ++i;
        if (i >= e) break;
        std::size_t chunk_end = i;
        while (chunk_end < e && !is_space(text[chunk_end])) ++chunk_end;

        std::size_t cb = i;
        while (cb < chunk_end && in_set(kOpeners, text[cb])) {
            push(out, text, cb, cb + 1, TokenKind::punct);
            ++cb;
        }
        std::size_t core_end = chunk_end;
        while (core_end > cb && in_set(kTrailing, text[core_end - 1])) --core_end;
        if (core_end > cb) {
            push(out, text, cb, core_end, classify(text.substr(cb, core_end - cb)));
        }
        for (std::size_t k = core_end; k < chunk_end; ++k) push(out, text, k, k + 1, TokenKind::punct);
        i = chunk_end;
    }
}

bool is_terminator(const Token& t) {
    if (t.kind == TokenKind::placeholder) return true;
    return t.kind == TokenKind::punct && (t.text == "." || t.text == "?" || t.text == "!");
}

bool absorbs(const Token& t) {
    if (t.kind != TokenKind::punct) return false;
    return t.text == ")" || t.text == "]" || t.text == "}" || t.text == "\"" || t.text == "'" ||
           is_terminator(t);
}

using Range = std::pair<std::size_t, std::size_t>;  // token indices [first, second)

std::vector<Range> rule_boundaries(const std::vector<Token>& tokens, const SentencizeOptions& opts) {
    std::vector<Range> ranges;
    const std::size_t n = tokens.size();
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < n) {
        if (!is_terminator(tokens[i])) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < n && absorbs(tokens[j])) ++j;

        bool boundary = true;
        if (tokens[i].text == "." && tokens[i].kind == TokenKind::punct) {
            if (i > 0 && tokens[i - 1].kind == TokenKind::word &&
                opts.abbreviations.count(to_lower_ascii(tokens[i - 1].text + "."))) {
                boundary = false;
            } else if (j < n && tokens[j].kind == TokenKind::word && tokens[j].text[0] >= 'a' &&
                       tokens[j].text[0] <= 'z') {
                boundary = false;
            }
        }
        if (boundary) {
            ranges.emplace_back(start, j);
            start = j;
        }
        i = j;
    }
    if (start < n) ranges.emplace_back(start, n);
    return ranges;
}

std::vector<Range> merge_short(const std::vector<Range>& ranges) {
    std::vector<Range> out;
    std::optional<std::size_t> pending;  // start of a short run carried forward
    for (std::size_t k = 0; k < ranges.size(); ++k) {
        Range r = ranges[k];
        if (pending) r.first = *pending;
        pending.reset();
        const bool last = k + 1 == ranges.size();
        if (r.second - r.first < 2 && !last) {
            pending = r.first;
            continue;
        }
        if (r.second - r.first < 2 && !out.empty()) {
            out.back().second = r.second;
            continue;
        }
        out.push_back(r);
    }
    return out;
}

std::vector<Range> apply_overrides(std::vector<Range> ranges, const std::string& doc_id,
                                   const std::vector<SentenceOverride>& overrides) {
    const std::string prefix = doc_id + "#";
    std::vector<std::pair<std::size_t, const SentenceOverride*>> mine;
    for (const auto& o : overrides) {
        if (o.id.compare(0, prefix.size(), prefix) != 0) continue;
        const auto suffix = o.id.substr(prefix.size());
        if (suffix.empty() || !std::all_of(suffix.begin(), suffix.end(), is_ascii_digit)) continue;
        mine.emplace_back(std::stoul(suffix), &o);
    }
    // Highest index first keeps the lower, still unprocessed indices valid.
    std::stable_sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t original = ranges.size();
    for (const auto& [idx, o] : mine) {
        if (idx >= original) throw DataError("override for unknown sentence " + o->id);
        if (o->action == SentenceOverride::Action::merge_next) {
            if (idx + 1 >= ranges.size()) throw DataError("override merges past the last sentence: " + o->id);
            ranges[idx].second = ranges[idx + 1].second;
            ranges.erase(ranges.begin() + static_cast<std::ptrdiff_t>(idx + 1));
        } else {
            auto& r = ranges[idx];
            if (o->token >= r.second - r.first) throw DataError("override split point out of range: " + o->id);
            const Range tail{r.first + o->token, r.second};
            r.second = tail.first;
            ranges.insert(ranges.begin() + static_cast<std::ptrdiff_t>(idx + 1), tail);
        }
    }
    return ranges;
}

std::string detokenize(const std::vector<Token>& tokens, std::size_t first, std::size_t last) {
    std::string out;
    for (std::size_t k = first; k < last; ++k) {
        const Token& t = tokens[k];
        if (t.kind == TokenKind::placeholder) {
            out += '!';
            continue;
        }
        if (k > first && t.begin > tokens[k - 1].end) out += ' ';
        out += t.text;
    }
    return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t prev = 0;
    for (const auto& span : find_math_spans(text)) {
        tokenize_plain(text, prev, span.begin, tokens);
        push(tokens, text, span.begin, span.end, TokenKind::math);
        prev = span.end;
    }
    tokenize_plain(text, prev, text.size(), tokens);
    return tokens;
}

std::vector<Token> tokenize_lenient(std::string_view text) {
    try {
        return tokenize(text);
    } catch (const DataError&) {
        std::vector<Token> tokens;
        tokenize_plain(text, 0, text.size(), tokens);
        return tokens;
    }
}

std::vector<Sentence> split_sentences(const std::vector<Token>& tokens, const CleanDocument& doc,
                                      const SentencizeOptions& opts) {
    auto ranges = merge_short(rule_boundaries(tokens, opts));
    if (!opts.overrides.empty()) ranges = apply_overrides(std::move(ranges), doc.id, opts.overrides);

    std::vector<Sentence> out;
    out.reserve(ranges.size());
    for (const auto& [first, last] : ranges) {
        Sentence s;
        s.doc_id = doc.id;
        s.index = out.size();
        s.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(first),
                        tokens.begin() + static_cast<std::ptrdiff_t>(last));
        s.text = detokenize(tokens, first, last);
        s.span_begin = tokens[first].begin;
        s.span_end = tokens[last - 1].end;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Sentence> sentencize(const CleanDocument& doc, const SentencizeOptions& opts) {
    try {
        return split_sentences(tokenize(doc), doc, opts);
    } catch (const DataError& e) {
        throw e.with_context(doc.id);
    }
}

nlohmann::json to_json(const Sentence& s) {
    return {{"id", s.id()}, {"doc_id", s.doc_id}, {"text", s.text}, {"n_tokens", s.tokens.size()}};
}

}  // namespace mathdef
