#include "mathdef/corpus.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mathdef/error.hpp"
#include "mathdef/utf8.hpp"
#include "parallel_for.hpp"

namespace mathdef {

std::string_view to_string(CorpusTag tag) {
    switch (tag) {
        case CorpusTag::markdown_concepts: return "markdown_concepts";
        case CorpusTag::latex_abstracts: return "latex_abstracts";
        case CorpusTag::plain: return "plain";
    }
    return "plain";
}

CorpusTag parse_corpus_tag(std::string_view name) {
    if (name == "markdown_concepts") return CorpusTag::markdown_concepts;
    if (name == "latex_abstracts") return CorpusTag::latex_abstracts;
    if (name == "plain") return CorpusTag::plain;
    throw DataError("unknown corpus tag '" + std::string(name) +
                    "' (expected markdown_concepts, latex_abstracts or plain)");
}

namespace {

bool glob_matches(const std::string& pattern, const std::string& rel_path) {
    const bool whole_path = pattern.find('/') != std::string::npos;
    std::string subject = rel_path;
    if (!whole_path) {
        auto slash = rel_path.rfind('/');
        if (slash != std::string::npos) subject = rel_path.substr(slash + 1);
    }
    return fnmatch(pattern.c_str(), subject.c_str(), whole_path ? FNM_PATHNAME : 0) == 0;
}

std::string read_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("read error in " + path.string());
    std::string text = ss.str();
    if (auto bad = utf8::first_invalid(text)) {
        throw DataError(path.string() + ": invalid UTF-8", *bad);
    }
    return text;
}

}  // namespace

std::vector<RawDocument> ingest_dir(const std::filesystem::path& root, CorpusTag tag,
                                    std::string_view glob, const WarningSink& warn) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw DataError("corpus root is not a readable directory: " + root.string());
    }
    const std::string pattern(glob.empty() ? "*" : glob);

    std::vector<RawDocument> docs;
    for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        if (!it->is_regular_file()) continue;
        auto rel = fs::relative(it->path(), root).generic_string();
        if (!glob_matches(pattern, rel)) continue;
        RawDocument doc;
        doc.id = std::move(rel);
        doc.source_path = it->path();
        doc.corpus_tag = tag;
        docs.push_back(std::move(doc));
    }
    if (ec) throw DataError("cannot walk " + root.string() + ": " + ec.message());

    std::sort(docs.begin(), docs.end(),
              [](const RawDocument& a, const RawDocument& b) { return a.id < b.id; });

    detail::parallel_for(docs.size(), [&](std::size_t i) {
        docs[i].raw_text = read_document(docs[i].source_path);
    });

    for (const auto& doc : docs) {
        if (doc.raw_text.empty()) {
            const std::string msg = "empty document: " + doc.id;
            if (warn) {
                warn(msg);
            } else {
                std::cerr << "warning: " << msg << '\n';
            }
        }
    }
    return docs;
}

nlohmann::json manifest_entry(const RawDocument& doc) {
    return {{"id", doc.id},
            {"path", doc.source_path.generic_string()},
            {"tag", to_string(doc.corpus_tag)},
            {"chars", utf8::code_points(doc.raw_text)}};
}

}  // namespace mathdef
