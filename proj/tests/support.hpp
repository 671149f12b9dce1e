#pragma once

// Shared by the doctest suites and the acceptance runner: fixture paths,
// scratch directories, golden-file loaders, hand-rolled random generators and
// independent oracles.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mathdef/corpus.hpp"

namespace testsupport {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline fs::path data_dir() { return fs::path(MATHDEF_TEST_DATA_DIR); }

class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "mathdef-test-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, std::string_view contents) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<json> read_jsonl(const fs::path& p) {
    std::vector<json> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(json::parse(line));
    }
    return rows;
}

inline void write_jsonl(const fs::path& p, const std::vector<json>& rows) {
    std::string s;
    for (const auto& r : rows) s += r.dump() + "\n";
    write_file(p, s);
}

// ---- golden sets ----------------------------------------------------------

struct CleanCase {
    std::string name;
    mathdef::CorpusTag tag;
    std::string raw;
    std::string clean;
};

inline std::vector<CleanCase> clean_golden() {
    std::vector<CleanCase> out;
    for (const auto& r : read_jsonl(data_dir() / "clean_golden.jsonl")) {
        out.push_back({r["name"], mathdef::parse_corpus_tag(r["tag"].get<std::string>()), r["raw"], r["clean"]});
    }
    return out;
}

struct SentenceCase {
    std::string name;
    mathdef::CorpusTag tag;
    std::string raw;
    std::vector<std::string> sentences;
};

inline std::vector<SentenceCase> sentence_golden() {
    std::vector<SentenceCase> out;
    for (const auto& r : read_jsonl(data_dir() / "sentence_golden.jsonl")) {
        out.push_back({r["name"], mathdef::parse_corpus_tag(r["tag"].get<std::string>()), r["raw"],
                       r["sentences"].get<std::vector<std::string>>()});
    }
    return out;
}

// ---- generators -----------------------------------------------------------

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(between(0, static_cast<int>(v.size()) - 1))];
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline const std::vector<std::string>& words() {
    static const std::vector<std::string> w{"group", "ring",   "the",   "set",    "is",    "a",      "map",
                                            "every", "module", "we",    "call",   "space", "compact", "if",
                                            "and",   "only",   "prime", "finite", "field", "normal"};
    return w;
}

// Math content that never ends in whitespace or relocatable punctuation.
inline std::string math_core(Gen& g) {
    static const std::vector<std::string> pieces{
        "x", "y_1", "a+b", "f(x)", "n!", "\\alpha", "x-y", "\\{x\\}", "x. y", "\\frac{1}{2}", "a,b",
        "\\text{ if } x", "G/H", "3.14", "p?q", "\\mathbb{R}", "k!/2", "e^{i\\pi}"};
    std::string s = g.pick(pieces);
    for (int k = g.between(0, 2); k > 0; --k) s += " " + g.pick(pieces);
    return s;
}

struct LatexCase {
    mathdef::CorpusTag tag = mathdef::CorpusTag::latex_abstracts;
    std::string raw;
    // Interior of each math region the cleaner must produce, in order.
    std::vector<std::string> math;
};

class LatexBuilder {
public:
    LatexBuilder(Gen& g, LatexCase& c) : g_(g), c_(c) {}

    std::string sentence(int depth = 0) {
        std::string s;
        const int n = g_.between(1, 6);
        for (int k = 0; k < n; ++k) {
            if (k) s += ' ';
            s += fragment(depth);
        }
        return s;
    }

private:
    std::string math_region() {
        static const char* punct = ".,;:?";
        const std::string core = math_core(g_);
        const std::string lead = g_.chance(0.2) ? " " : "";
        const bool has_punct = g_.chance(0.35);
        const std::string tail = g_.chance(0.2) ? " " : "";
        std::string inner = lead + core;
        if (has_punct) inner += std::string(1, punct[g_.between(0, 4)]);
        inner += tail;
        c_.math.push_back(lead + core + (has_punct ? "" : tail));
        switch (g_.between(0, 3)) {
            case 0: return "$" + inner + "$";
            case 1: return "$$" + inner + "$$";
            case 2: return "\\(" + inner + "\\)";
            default: return "\\[" + inner + "\\]";
        }
    }

    std::string environment() {
        static const std::vector<std::string> envs{"align", "align*", "equation", "gather"};
        const int rows = g_.between(1, 3);
        std::string body;
        std::string expected;
        for (int r = 0; r < rows; ++r) {
            std::string core = math_core(g_);
            if (r) {
                body += " \\\\ ";
                expected += "; ";
            }
            body += core;
            expected += core;
            if (g_.chance(0.3)) body += " \\label{eq" + std::to_string(r) + "}";
        }
        if (g_.chance(0.4)) body += ".";
        c_.math.push_back(expected);
        const auto& env = g_.pick(envs);
        return "\\begin{" + env + "} " + body + " \\end{" + env + "}";
    }

    std::string fragment(int depth) {
        const bool md = c_.tag == mathdef::CorpusTag::markdown_concepts;
        switch (g_.between(0, md ? 15 : 11)) {
            case 0:
            case 1: return g_.pick(words());
            case 2: return g_.pick(words()) + "-" + g_.pick(words());
            case 3: return g_.pick(words()) + g_.pick(std::vector<std::string>{".", ",", "!", "?", "!!", ";"});
            case 4:
            case 5: return math_region();
            case 6: return math_region() + "-" + g_.pick(words());
            case 7:
                if (depth < 2) {
                    return "\\" + g_.pick(std::vector<std::string>{"textbf", "emph", "textit", "underline"}) + "{" +
                           sentence(depth + 1) + "}";
                }
                return g_.pick(words());
            case 8: return "\\cite{key" + std::to_string(g_.between(0, 9)) + "}";
            case 9: return g_.chance(0.5) ? "\\label{l}" : "\\cite[p. 2]{k}";
            case 10: return environment();
            case 11: return g_.pick(std::vector<std::string>{"3.14", "e.g.", "i.e.", "(" + g_.pick(words()) + ")"});
            case 12: return "[[" + g_.pick(words()) + "|" + g_.pick(words()) + "]]";
            case 13: return "[[" + g_.pick(words()) + "]]";
            case 14: return "**" + g_.pick(words()) + "**";
            default: return "[" + g_.pick(words()) + "](" + g_.pick(words()) + ".md)";
        }
    }

    Gen& g_;
    LatexCase& c_;
};

inline LatexCase latex_case(Gen& g) {
    LatexCase c;
    c.tag = g.chance(0.3) ? mathdef::CorpusTag::markdown_concepts : mathdef::CorpusTag::latex_abstracts;
    LatexBuilder b(g, c);
    const int paragraphs = g.between(1, 3);
    for (int p = 0; p < paragraphs; ++p) {
        if (p) c.raw += "\n";
        if (g.chance(0.15)) c.raw += "\\section{" + g.pick(words()) + "} ";
        const int sentences = g.between(1, 4);
        for (int s = 0; s < sentences; ++s) {
            if (s) c.raw += ' ';
            c.raw += b.sentence();
        }
    }
    return c;
}

// ---- oracles ----------------------------------------------------------------

/// Exact decimal rendering of num/den with round-half-even, by long division.
inline std::string decimal_oracle(std::uint64_t num, std::uint64_t den, int decimals) {
    if (den == 0) {
        num = 0;
        den = 1;
    }
    std::uint64_t whole = num / den;
    std::uint64_t rem = num % den;
    std::vector<int> digits;
    for (int k = 0; k < decimals; ++k) {
        rem *= 10;
        digits.push_back(static_cast<int>(rem / den));
        rem %= den;
    }
    // compare the remainder against one half
    const unsigned __int128 twice = static_cast<unsigned __int128>(rem) * 2;
    const int last = digits.empty() ? static_cast<int>(whole % 2) : digits.back();
    const bool up = twice > den || (twice == den && last % 2 == 1);
    if (up) {
        int k = decimals - 1;
        while (k >= 0 && digits[static_cast<std::size_t>(k)] == 9) digits[static_cast<std::size_t>(k--)] = 0;
        if (k >= 0) {
            ++digits[static_cast<std::size_t>(k)];
        } else {
            ++whole;
        }
    }
    std::string s = std::to_string(whole);
    if (decimals > 0) {
        s += '.';
        for (int d : digits) s += static_cast<char>('0' + d);
    }
    return s;
}

/// Mean binary cross-entropy plus (l2/2)||w||^2 on dense inputs, computed the
/// textbook way.
inline double dense_objective(const std::vector<double>& w, double b, const std::vector<std::vector<double>>& x,
                              const std::vector<int>& y, double l2) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = b;
        for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[i][j];
        const double p = 1.0 / (1.0 + std::exp(-z));
        total += y[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    double sq = 0.0;
    for (double v : w) sq += v * v;
    return total / static_cast<double>(x.size()) + 0.5 * l2 * sq;
}

}  // namespace testsupport
