#include <doctest.h>

#include "mathdef/corpus.hpp"
#include "mathdef/error.hpp"
#include "support.hpp"

using namespace mathdef;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

std::vector<std::string> ids(const std::vector<RawDocument>& docs) {
    std::vector<std::string> out;
    for (const auto& d : docs) out.push_back(d.id);
    return out;
}

std::vector<std::string> collect_warnings(const std::filesystem::path& root, CorpusTag tag, std::string_view glob,
                                          std::vector<RawDocument>* docs = nullptr) {
    std::vector<std::string> warnings;
    auto got = ingest_dir(root, tag, glob, [&](const std::string& w) { warnings.push_back(w); });
    if (docs) *docs = std::move(got);
    return warnings;
}

}  // namespace

TEST_CASE("two markdown files give two documents named by relative path") {
    TempDir dir;
    write_file(dir / "b.md", "second");
    write_file(dir / "a.md", "first");
    const auto docs = ingest_dir(dir.path(), CorpusTag::markdown_concepts);
    REQUIRE(docs.size() == 2);
    CHECK(ids(docs) == std::vector<std::string>{"a.md", "b.md"});
    CHECK(docs[0].raw_text == "first");
    CHECK(docs[0].corpus_tag == CorpusTag::markdown_concepts);
}

TEST_CASE("empty directory gives no documents") {
    TempDir dir;
    CHECK(ingest_dir(dir.path(), CorpusTag::plain).empty());
}

TEST_CASE("702 concept files give 702 documents") {
    TempDir dir;
    for (int i = 0; i < 702; ++i) write_file(dir / ("concept" + std::to_string(i) + ".md"), "A [[thing]].");
    CHECK(ingest_dir(dir.path(), CorpusTag::markdown_concepts, "*.md").size() == 702);
}

TEST_CASE("glob filters by file name, or by path when it contains a slash") {
    TempDir dir;
    write_file(dir / "x.tex", "x");
    write_file(dir / "notes.md", "n");
    write_file(dir / "sub" / "y.tex", "y");
    write_file(dir / "sub" / "deep" / "z.tex", "z");

    CHECK(ids(ingest_dir(dir.path(), CorpusTag::latex_abstracts, "*.tex")) ==
          std::vector<std::string>{"sub/deep/z.tex", "sub/y.tex", "x.tex"});
    CHECK(ids(ingest_dir(dir.path(), CorpusTag::latex_abstracts, "sub/*.tex")) ==
          std::vector<std::string>{"sub/y.tex"});
    CHECK(ingest_dir(dir.path(), CorpusTag::latex_abstracts, "*").size() == 4);
}

TEST_CASE("empty files are kept with a warning") {
    TempDir dir;
    write_file(dir / "empty.tex", "");
    write_file(dir / "full.tex", "text");
    std::vector<RawDocument> docs;
    const auto warnings = collect_warnings(dir.path(), CorpusTag::latex_abstracts, "*", &docs);
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].raw_text.empty());
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("empty.tex") != std::string::npos);
}

TEST_CASE("invalid UTF-8 fails naming the path and byte offset") {
    TempDir dir;
    write_file(dir / "a.tex", "fine");
    write_file(dir / "b.tex", "bad \xFF byte");
    write_file(dir / "c.tex", "\xFE also bad");
    try {
        ingest_dir(dir.path(), CorpusTag::latex_abstracts);
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        // the first failing file in path order is reported
        CHECK(std::string(e.what()).find("b.tex") != std::string::npos);
        CHECK(e.offset() == 4u);
    }
}

TEST_CASE("missing root is an error") {
    CHECK_THROWS_AS(ingest_dir("/nonexistent/corpus", CorpusTag::plain), DataError);
}

TEST_CASE("ingestion is deterministic and manifests count code points") {
    TempDir dir;
    for (int i = 0; i < 40; ++i) {
        write_file(dir / ("d" + std::to_string(i % 7)) / ("f" + std::to_string(i) + ".md"), std::string(i, 'x'));
    }
    write_file(dir / "u.md", "\xC2\xAC" "Def");
    const auto first = ingest_dir(dir.path(), CorpusTag::markdown_concepts);
    const auto second = ingest_dir(dir.path(), CorpusTag::markdown_concepts);
    CHECK(first == second);
    CHECK(first.size() == 41);

    const auto& u = first.back();
    REQUIRE(u.id == "u.md");
    const auto m = manifest_entry(u);
    CHECK(m["id"] == "u.md");
    CHECK(m["tag"] == "markdown_concepts");
    CHECK(m["chars"] == 4);
}

TEST_CASE("corpus tag names") {
    for (auto tag : {CorpusTag::markdown_concepts, CorpusTag::latex_abstracts, CorpusTag::plain}) {
        CHECK(parse_corpus_tag(to_string(tag)) == tag);
    }
    CHECK_THROWS_AS(parse_corpus_tag("html"), DataError);
}
