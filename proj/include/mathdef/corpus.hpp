#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mathdef {

/// Which idiosyncrasy rules apply when cleaning a document.
enum class CorpusTag {
    markdown_concepts,  // one Markdown note per concept, wiki links, ** bold
    latex_abstracts,    // one LaTeX abstract per file
    plain,
};

std::string_view to_string(CorpusTag tag);
/// Throws DataError on an unknown name.
CorpusTag parse_corpus_tag(std::string_view name);

struct RawDocument {
    std::string id;  // path relative to the ingestion root, '/' separated
    std::filesystem::path source_path;
    CorpusTag corpus_tag = CorpusTag::plain;
    std::string raw_text;  // valid UTF-8

    friend bool operator==(const RawDocument&, const RawDocument&) = default;
};

using WarningSink = std::function<void(const std::string&)>;

/// Reads every regular file under `root` whose relative path matches `glob`
/// (fnmatch syntax; a pattern without '/' is matched against the file name
/// only). Documents come back sorted by id. Files are read in parallel.
///
/// Empty files yield documents with empty text and a warning. An unreadable
/// file or invalid UTF-8 throws DataError naming the path (and byte offset);
/// when several files fail, the first in path order is reported.
std::vector<RawDocument> ingest_dir(const std::filesystem::path& root, CorpusTag tag,
                                    std::string_view glob = "*",
                                    const WarningSink& warn = {});

/// {"id", "path", "tag", "chars"} per document; chars counts code points.
nlohmann::json manifest_entry(const RawDocument& doc);

}  // namespace mathdef
