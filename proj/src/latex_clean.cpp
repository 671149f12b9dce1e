#include "mathdef/latex_clean.hpp"

#include <cstring>
#include <optional>

#include "mathdef/error.hpp"
#include "text_util.hpp"

namespace mathdef {
namespace {

enum class Delim { dollar, double_dollar, paren, bracket };

struct Region {
    std::size_t begin;
    std::size_t content_begin;
    std::size_t content_end;
    std::size_t end;
};

std::optional<Delim> opener_at(std::string_view t, std::size_t i) {
    if (t[i] == '$') {
        return (i + 1 < t.size() && t[i + 1] == '$') ? Delim::double_dollar : Delim::dollar;
    }
    if (t[i] == '\\' && i + 1 < t.size()) {
        if (t[i + 1] == '(') return Delim::paren;
        if (t[i + 1] == '[') return Delim::bracket;
    }
    return std::nullopt;
}

// Finds the end of the math region opened at `open`. Backslash pairs are
// skipped as a unit; a '$' inside braces (\text{$x$}) is literal.
Region scan_region(std::string_view t, std::size_t open, Delim kind) {
    const std::size_t content_begin = open + (kind == Delim::dollar ? 1 : 2);
    std::size_t i = content_begin;
    int depth = 0;
    while (i < t.size()) {
        const char c = t[i];
        if (c == '\\') {
            if (i + 1 < t.size()) {
                const char d = t[i + 1];
                if (kind == Delim::paren && d == ')') return {open, content_begin, i, i + 2};
                if (kind == Delim::bracket && d == ']') return {open, content_begin, i, i + 2};
            }
            i += 2;
            continue;
        }
        if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (depth > 0) --depth;
        } else if (c == '$' && depth == 0) {
            if (kind == Delim::dollar) return {open, content_begin, i, i + 1};
            if (kind == Delim::double_dollar && i + 1 < t.size() && t[i + 1] == '$') {
                return {open, content_begin, i, i + 2};
            }
            throw DataError("stray '$' inside math", i);
        }
        ++i;
    }
    throw DataError("unbalanced math delimiter", open);
}

bool command_matches(const std::set<std::string>& patterns, const std::string& name) {
    if (patterns.count(name)) return true;
    return patterns.count(name + "*") != 0;
}

std::string_view strip_starred(std::string_view s) {
    if (!s.empty() && s.back() == '*') s.remove_suffix(1);
    return s;
}

class Stripper {
public:
    Stripper(std::string_view text, CorpusTag tag, const StripConfig& cfg)
        : t_(text), markdown_(tag == CorpusTag::markdown_concepts), cfg_(cfg) {}

    std::string run() {
        std::string out;
        out.reserve(t_.size());
        process(0, t_.size(), out);
        return out;
    }

private:
    void process(std::size_t b, std::size_t e, std::string& out) {
        std::size_t i = b;
        while (i < e) {
            const char c = t_[i];
            if (markdown_ && at_line_start(i) && c == '#' && is_heading(i, e)) {
                while (i < e && t_[i] != '\n') ++i;
                continue;
            }
            if (auto kind = opener_at(t_, i)) {
                const Region r = scan_region(t_, i, *kind);
                if (r.end > e) throw DataError("unbalanced math delimiter", i);
                out.append(t_.substr(r.begin, r.end - r.begin));
                i = r.end;
                continue;
            }
            if (c == '\\') {
                i = command(i, e, out);
                continue;
            }
            if (markdown_) {
                if (auto next = markdown(i, e, out)) {
                    i = *next;
                    continue;
                }
            }
            out += c;
            ++i;
        }
    }

    bool at_line_start(std::size_t i) const { return i == 0 || t_[i - 1] == '\n'; }

    bool is_heading(std::size_t i, std::size_t e) const {
        std::size_t j = i;
        while (j < e && t_[j] == '#') ++j;
        return j - i <= 6 && (j == e || t_[j] == ' ' || t_[j] == '\t' || t_[j] == '\n');
    }

    // Index of the '}' matching the '{' at `open`.
    std::size_t group_end(std::size_t open, std::size_t e, std::size_t report_at) const {
        int depth = 0;
        for (std::size_t i = open; i < e; ++i) {
            if (t_[i] == '\\') {
                ++i;
                continue;
            }
            if (t_[i] == '{') {
                ++depth;
            } else if (t_[i] == '}') {
                if (--depth == 0) return i;
            }
        }
        throw DataError("unterminated group", report_at);
    }

    std::size_t command(std::size_t i, std::size_t e, std::string& out) {
        std::size_t j = i + 1;
        if (j >= e || !is_ascii_alpha(t_[j])) {
            out.append(t_.substr(i, std::min(e, i + 2) - i));
            return std::min(e, i + 2);
        }
        while (j < e && is_ascii_alpha(t_[j])) ++j;
        std::string name(t_.substr(i + 1, j - i - 1));
        std::size_t after = j;
        if (after < e && t_[after] == '*') {
            name += '*';
            ++after;
        }

        if (name == "begin" && after < e && t_[after] == '{') {
            const std::size_t close = group_end(after, e, i);
            const std::string env(t_.substr(after + 1, close - after - 1));
            if (cfg_.environments.count(env)) return environment(i, close + 1, env, e, out);
        }
        if (cfg_.unwrap.count(std::string(strip_starred(name)))) {
            std::size_t k = after;
            while (k < e && (t_[k] == ' ' || t_[k] == '\t')) ++k;
            if (k < e && t_[k] == '{') {
                const std::size_t close = group_end(k, e, i);
                process(k + 1, close, out);
                return close + 1;
            }
        }
        if (command_matches(cfg_.remove, std::string(strip_starred(name))) &&
            (name.back() != '*' || command_matches(cfg_.remove, name))) {
            return remove_command(i, after, e, out);
        }
        out.append(t_.substr(i, j - i));
        return j;
    }

    // Deletes \name[opt]{arg} and tidies the surrounding spaces so that
    // "shown \cite{x}." becomes "shown." and "a \label{l} b" becomes "a b".
    std::size_t remove_command(std::size_t i, std::size_t k, std::size_t e, std::string& out) {
        while (k < e && t_[k] == '[') {
            const auto close = t_.find(']', k);
            if (close == std::string_view::npos || close >= e) {
                throw DataError("unterminated optional argument", i);
            }
            k = close + 1;
        }
        if (k < e && t_[k] == '{') k = group_end(k, e, i) + 1;

        bool had_space = false;
        while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) {
            out.pop_back();
            had_space = true;
        }
        while (k < e && (t_[k] == ' ' || t_[k] == '\t')) {
            ++k;
            had_space = true;
        }
        const bool line_start = out.empty() || out.back() == '\n';
        const bool closes = k >= e || t_[k] == '\n' || std::strchr(".,;:?!)", t_[k]) != nullptr;
        if (!line_start && !closes && had_space) out += ' ';
        return k;
    }

    std::size_t environment(std::size_t i, std::size_t body, const std::string& env, std::size_t e,
                            std::string& out) {
        const std::string end_tag = "\\end{" + env + "}";
        const auto end_pos = t_.find(end_tag, body);
        if (end_pos == std::string_view::npos || end_pos + end_tag.size() > e) {
            throw DataError("unterminated environment '" + env + "'", i);
        }
        std::vector<std::string> rows;
        std::string row;
        int depth = 0;
        auto flush = [&] {
            const auto unlabeled = remove_labels(row);
            const auto cleaned = trim(unlabeled);
            if (!cleaned.empty()) rows.emplace_back(cleaned);
            row.clear();
        };
        for (std::size_t k = body; k < end_pos; ++k) {
            const char c = t_[k];
            if (c == '\\' && k + 1 < end_pos) {
                if (t_[k + 1] == '\\' && depth == 0) {
                    flush();
                } else {
                    row.append(t_.substr(k, 2));
                }
                ++k;
                continue;
            }
            if (c == '{') ++depth;
            if (c == '}' && depth > 0) --depth;
            row += c;
        }
        flush();
        if (!rows.empty()) {
            out += '$';
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (r) out += cfg_.row_separator;
                out += rows[r];
            }
            out += '$';
        }
        return end_pos + end_tag.size();
    }

    static std::string remove_labels(const std::string& row) {
        std::string out;
        std::size_t i = 0;
        while (i < row.size()) {
            if (row.compare(i, 7, "\\label{") == 0) {
                const auto close = row.find('}', i);
                if (close != std::string::npos) {
                    i = close + 1;
                    continue;
                }
            }
            out += row[i++];
        }
        return out;
    }

    std::optional<std::size_t> markdown(std::size_t i, std::size_t e, std::string& out) {
        const char c = t_[i];
        const auto next = [&](std::size_t k) { return k < e ? t_[k] : '\0'; };
        if (c == '[' && next(i + 1) == '[') {
            const auto close = t_.find("]]", i + 2);
            if (close == std::string_view::npos || close + 2 > e) {
                throw DataError("unterminated wiki link", i);
            }
            std::size_t shown = i + 2;
            const auto pipe = t_.find('|', i + 2);
            if (pipe != std::string_view::npos && pipe < close) shown = pipe + 1;
            process(shown, close, out);
            return close + 2;
        }
        if (c == '[') {
            // [text](target) with a whitespace-free target on one line
            const auto rb = t_.find_first_of("[]\n", i + 1);
            if (rb != std::string_view::npos && rb + 1 < e && t_[rb] == ']' && t_[rb + 1] == '(') {
                const auto rp = t_.find_first_of(") \t\n", rb + 2);
                if (rp != std::string_view::npos && rp < e && t_[rp] == ')') {
                    process(i + 1, rb, out);
                    return rp + 1;
                }
            }
            return std::nullopt;
        }
        if ((c == '*' && next(i + 1) == '*') || (c == '_' && next(i + 1) == '_')) return i + 2;
        if (c == '*') return i + 1;
        if (c == '_') {
            const bool prev_word = i > 0 && is_ascii_alnum(t_[i - 1]);
            const bool next_word = is_ascii_alnum(next(i + 1));
            if (!(prev_word && next_word)) return i + 1;
        }
        return std::nullopt;
    }

    std::string_view t_;
    bool markdown_;
    const StripConfig& cfg_;
};

// Applies `on_text(text, begin, end, out)` to every stretch outside math and
// copies math regions through unchanged.
template <typename OnText>
std::string transform_outside_math(std::string_view text, OnText&& on_text) {
    const auto spans = find_math_spans(text);
    std::string out;
    out.reserve(text.size() + text.size() / 8);
    std::size_t prev = 0;
    for (const auto& s : spans) {
        on_text(text, prev, s.begin, out);
        out.append(text.substr(s.begin, s.end - s.begin));
        prev = s.end;
    }
    on_text(text, prev, text.size(), out);
    return out;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const DataError& e) {
        throw e.with_context(name);
    }
}

}  // namespace

CleanConfig CleanConfig::from(const KeyValueConfig& kv) {
    CleanConfig cfg;
    auto as_set = [](const std::vector<std::string>& v) { return std::set<std::string>(v.begin(), v.end()); };
    if (auto v = kv.get_list("strip.unwrap")) cfg.strip.unwrap = as_set(*v);
    if (auto v = kv.get_list("strip.delete")) cfg.strip.remove = as_set(*v);
    if (auto v = kv.get_list("strip.environments")) cfg.strip.environments = as_set(*v);
    if (auto v = kv.get("strip.row_separator")) cfg.strip.row_separator = unquote(*v);
    if (auto v = kv.get("relocate.punctuation")) {
        std::string p;
        for (char c : *v) {
            if (!is_space(c)) p += c;
        }
        cfg.relocated_punctuation = p;
    }
    return cfg;
}

std::vector<MathSpan> find_math_spans(std::string_view text) {
    std::vector<MathSpan> spans;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '\\') {
            i += 2;
            continue;
        }
        if (text[i] == '$') {
            const Region r = scan_region(text, i, Delim::dollar);
            spans.push_back({r.begin, r.end});
            i = r.end;
            continue;
        }
        ++i;
    }
    return spans;
}

std::string normalize_delimiters(std::string_view t) {
    std::string out;
    out.reserve(t.size());
    std::size_t i = 0;
    while (i < t.size()) {
        const char c = t[i];
        if (c == '\\' && i + 1 < t.size() && (t[i + 1] == ')' || t[i + 1] == ']')) {
            throw DataError("closing math delimiter without opener", i);
        }
        if (auto kind = opener_at(t, i)) {
            const Region r = scan_region(t, i, *kind);
            const auto content = t.substr(r.content_begin, r.content_end - r.content_begin);
            if (!trim(content).empty()) {
                if (!out.empty() && out.back() == '$') out += ' ';
                out += '$';
                out.append(content);
                out += '$';
            }
            i = r.end;
            continue;
        }
        if (c == '\\') {
            out.append(t.substr(i, 2));
            i += 2;
            continue;
        }
        out += c;
        ++i;
    }
    return out;
}

std::string relocate_punctuation(std::string_view text, std::string_view punctuation) {
    const auto spans = find_math_spans(text);
    std::string out;
    out.reserve(text.size());
    std::size_t prev = 0;
    for (const auto& s : spans) {
        out.append(text.substr(prev, s.begin - prev));
        std::string_view content = text.substr(s.begin + 1, s.end - s.begin - 2);
        std::string moved;
        for (;;) {
            const auto body = rtrim(content);
            if (body.size() < 2) break;
            const char p = body.back();
            if (punctuation.find(p) == std::string_view::npos) break;
            std::size_t backslashes = 0;
            for (std::size_t k = body.size() - 1; k-- > 0 && body[k] == '\\';) ++backslashes;
            if (backslashes % 2 == 1) break;  // \, \; \: are spacing commands
            const auto rest = rtrim(body.substr(0, body.size() - 1));
            if (rest.empty()) break;
            moved.insert(moved.begin(), p);
            content = rest;
        }
        out += '$';
        out.append(content);
        out += '$';
        out += moved;
        prev = s.end;
    }
    out.append(text.substr(prev));
    return out;
}

std::string pad_hyphens(std::string_view text) {
    return transform_outside_math(text, [](std::string_view t, std::size_t b, std::size_t e, std::string& out) {
        std::size_t i = b;
        while (i < e) {
            if (t[i] == '\\' && i + 1 < e) {
                out.append(t.substr(i, 2));
                i += 2;
                continue;
            }
            if (t[i] != '-') {
                out += t[i++];
                continue;
            }
            std::size_t j = i;
            while (j < e && t[j] == '-') ++j;
            if (!out.empty() && !is_space(out.back())) out += ' ';
            out.append(t.substr(i, j - i));
            if (j < t.size() && !is_space(t[j])) out += ' ';
            i = j;
        }
    });
}

PlaceholderResult placeholder_exclamations(std::string_view text) {
    PlaceholderResult result;
    result.text = transform_outside_math(text, [&](std::string_view t, std::size_t b, std::size_t e, std::string& out) {
        std::size_t i = b;
        while (i < e) {
            if (t[i] == '\\' && i + 1 < e) {
                out.append(t.substr(i, 2));
                i += 2;
                continue;
            }
            if (t[i] != '!') {
                out += t[i++];
                continue;
            }
            if (!out.empty() && !is_space(out.back())) out += ' ';
            result.positions.push_back(out.size());
            out.append(kPlaceholder);
            if (i + 1 < t.size() && !is_space(t[i + 1]) && std::strchr(".,;:?!)]}\"'", t[i + 1]) == nullptr) {
                out += ' ';
            }
            ++i;
        }
    });
    return result;
}

std::string strip_formatting(std::string_view text, CorpusTag tag, const StripConfig& cfg) {
    return Stripper(text, tag, cfg).run();
}

CleanDocument clean(const RawDocument& doc, const CleanConfig& cfg) {
    try {
        auto text = stage("strip_formatting", [&] { return strip_formatting(doc.raw_text, doc.corpus_tag, cfg.strip); });
        text = stage("normalize_delimiters", [&] { return normalize_delimiters(text); });
        text = stage("relocate_punctuation", [&] { return relocate_punctuation(text, cfg.relocated_punctuation); });
        text = stage("pad_hyphens", [&] { return pad_hyphens(text); });
        auto marked = stage("placeholder_exclamations", [&] { return placeholder_exclamations(text); });

        CleanDocument out;
        out.id = doc.id;
        out.corpus_tag = doc.corpus_tag;
        out.cleaned_text = std::move(marked.text);
        out.placeholder_positions = std::move(marked.positions);
        out.math_spans = find_math_spans(out.cleaned_text);
        return out;
    } catch (const DataError& e) {
        throw e.with_context(doc.id);
    }
}

}  // namespace mathdef
