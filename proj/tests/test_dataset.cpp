#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "mathdef/dataset.hpp"
#include "mathdef/error.hpp"
#include "mathdef/evaluate.hpp"
#include "mathdef/sentencize.hpp"
#include "support.hpp"

using namespace mathdef;

namespace {

Dataset make(std::size_t positives, std::size_t negatives, const std::string& name = "d") {
    Dataset d;
    d.meta.name = name;
    for (std::size_t i = 0; i < positives + negatives; ++i) {
        const int label = i < positives ? 1 : 0;
        d.examples.push_back({name + "-" + std::to_string(i), "sentence " + std::to_string(i), label, name, {}});
    }
    return d;
}

std::multiset<std::string> negative_ids(const Dataset& d) {
    std::multiset<std::string> out;
    for (const auto& e : d.examples) {
        if (e.label == 0) out.insert(e.id);
    }
    return out;
}

std::vector<std::string> ids(const Dataset& d) {
    std::vector<std::string> out;
    for (const auto& e : d.examples) out.push_back(e.id);
    return out;
}

}  // namespace

TEST_CASE("density oracle on corpus-shaped files") {
    struct Case {
        std::size_t pos, total;
        double expected;
    };
    for (const auto& c : {Case{231, 3068, 0.0753}, Case{1934, 6140, 0.3150}, Case{1045, 4667, 0.2239}}) {
        const auto d = dataset_from_jsonl(dataset_to_jsonl(make(c.pos, c.total - c.pos)), "x");
        const auto dens = density(d);
        CHECK(dens.positives == c.pos);
        CHECK(dens.total == c.total);
        CHECK(std::fabs(dens.value() - c.expected) <= 0.00005);
        CHECK(format_ratio({dens.positives, dens.total}, 4) ==
              testsupport::decimal_oracle(c.pos, c.total, 4));
    }
    // Chicago- and TAC-shaped halves combine to "about 22%"
    const std::vector<Dataset> parts{make(814, 1599 - 814, "chicago"), make(231, 3068 - 231, "tac")};
    const auto all = combine(parts, "all");
    CHECK(density(all).positives == 1045);
    CHECK(density(all).total == 4667);

    Dataset empty;
    CHECK(density(empty).empty());
    CHECK(density(empty).value() == 0.0);
}

TEST_CASE("attach_labels requires a label for every sentence and a sentence for every label") {
    const std::vector<TextRecord> recs{{"a#0", "A ring is a set."}, {"a#1", "It works."}};
    const auto d = attach_labels(std::span<const TextRecord>(recs), {{"a#0", 1}, {"a#1", 0}}, "tac", "n");
    REQUIRE(d.size() == 2);
    CHECK(d.examples[0].label == 1);
    CHECK(d.examples[0].corpus == "tac");
    CHECK(d.meta.name == "n");

    CHECK_THROWS_AS(attach_labels(std::span<const TextRecord>(recs), {{"a#0", 1}}, "tac"), DataError);
    CHECK_THROWS_AS(attach_labels(std::span<const TextRecord>(recs), {{"a#0", 1}, {"a#1", 0}, {"zz", 1}}, "tac"),
                    DataError);
    CHECK_THROWS_AS(attach_labels(std::span<const TextRecord>(recs), {{"a#0", 2}, {"a#1", 0}}, "tac"), DataError);

    Sentence s;
    s.doc_id = "doc";
    s.index = 3;
    s.text = "Hi.";
    const std::vector<Sentence> sents{s};
    CHECK(attach_labels(std::span<const Sentence>(sents), {{"doc#3", 1}}, "c").examples[0].id == "doc#3");
}

TEST_CASE("split sizes, disjointness, order and determinism") {
    const auto d = make(30, 70);
    const auto a = split(d, 0.2, 7);
    const auto b = split(d, 0.2, 7);
    CHECK(a.val.size() == 20);
    CHECK(a.train.size() == 80);
    CHECK(dataset_to_jsonl(a.train) == dataset_to_jsonl(b.train));
    CHECK(dataset_to_jsonl(a.val) == dataset_to_jsonl(b.val));
    CHECK(a.train.meta.name == "d.train");
    CHECK(a.val.meta.seed == 7u);

    std::vector<std::string> all = ids(a.train);
    const auto v = ids(a.val);
    all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end());
    auto expected = ids(d);
    std::sort(expected.begin(), expected.end());
    CHECK(all == expected);

    // both halves are subsequences of the input
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < d.size(); ++i) index[d.examples[i].id] = i;
    for (const auto* half : {&a.train, &a.val}) {
        for (std::size_t i = 1; i < half->size(); ++i) {
            CHECK(index[half->examples[i - 1].id] < index[half->examples[i].id]);
        }
    }

    CHECK(ids(split(d, 0.2, 8).val) != ids(a.val));
}

TEST_CASE("stratified split keeps the density") {
    const auto d = make(30, 70);
    const auto s = split(d, 0.2, 3, true);
    CHECK(s.val.size() == 20);
    CHECK(s.val.positives() == 6);
    CHECK(s.train.positives() == 24);
}

TEST_CASE("split errors") {
    CHECK_THROWS_AS(split(make(1, 1), 0.2, 0), DataError);   // rounds to an empty validation set
    CHECK_THROWS_AS(split(make(5, 5), 0.0, 0), DataError);
    CHECK_THROWS_AS(split(make(5, 5), 1.0, 0), DataError);
    CHECK_THROWS_AS(split(oversample(make(2, 8), OversampleMode::minority(), 0), 0.2, 0), DataError);
}

TEST_CASE("combine concatenates and rejects shared ids") {
    const std::vector<Dataset> parts{make(1, 1, "a"), make(2, 0, "b")};
    const auto c = combine(parts, "ab");
    CHECK(ids(c) == std::vector<std::string>{"a-0", "a-1", "b-0", "b-1"});
    CHECK(c.meta.created_from == std::vector<std::string>{"a", "b"});
    const std::vector<Dataset> clash{make(1, 1, "a"), make(1, 1, "a")};
    CHECK_THROWS_AS(combine(clash, "x"), DataError);
}

TEST_CASE("oversampling to balance and to a target density") {
    const auto train = make(7, 93);

    const auto bal = oversample(train, OversampleMode::minority(), 1);
    CHECK(bal.positives() == 93);
    CHECK(bal.size() - bal.positives() == 93);
    CHECK(negative_ids(bal) == negative_ids(train));

    const auto t30 = oversample(train, OversampleMode::to_density(0.30), 1);
    CHECK(t30.positives() == 40);
    CHECK(t30.size() - t30.positives() == 93);
    CHECK(negative_ids(t30) == negative_ids(train));
    // minimality: one copy fewer falls below the target
    const auto pos = t30.positives();
    const auto total = t30.size();
    CHECK(pos * 10 >= 3 * total);
    CHECK((pos - 1) * 10 < 3 * (total - 1));

    // copies reference an original positive with identical text
    std::map<std::string, const LabeledExample*> by_id;
    for (const auto& e : t30.examples) by_id[e.id] = &e;
    std::size_t copies = 0;
    for (const auto& e : t30.examples) {
        if (!e.duplicate_of) continue;
        ++copies;
        REQUIRE(by_id.count(*e.duplicate_of));
        CHECK(by_id[*e.duplicate_of]->text == e.text);
        CHECK(by_id[*e.duplicate_of]->label == 1);
        CHECK_FALSE(by_id[*e.duplicate_of]->duplicate_of.has_value());
    }
    CHECK(copies == 33);
    CHECK(dataset_to_jsonl(t30) == dataset_to_jsonl(oversample(train, OversampleMode::to_density(0.30), 1)));
    CHECK_NOTHROW(dataset_from_jsonl(dataset_to_jsonl(t30), "t30"));
}

TEST_CASE("oversampling errors") {
    CHECK_THROWS_AS(oversample(make(0, 10), OversampleMode::minority(), 0), DataError);
    CHECK_THROWS_AS(oversample(make(5, 5), OversampleMode::minority(), 0), DataError);
    CHECK_THROWS_AS(oversample(make(40, 60), OversampleMode::to_density(0.3), 0), DataError);
    CHECK_THROWS_AS(oversample(make(60, 40), OversampleMode::to_density(0.7), 0), DataError);
    CHECK_THROWS_AS(oversample(make(1, 9), OversampleMode::to_density(1.0), 0), DataError);
}

TEST_CASE("property: min_positives_for_density matches brute force") {
    testsupport::Gen g(5);
    for (int n = 0; n < 2000; ++n) {
        const auto negatives = static_cast<std::size_t>(g.between(0, 5000));
        const int per_mille = g.between(1, 999);
        const double p = per_mille / 1000.0;
        std::size_t brute = 0;
        while (brute * 1000 < static_cast<std::size_t>(per_mille) * (brute + negatives)) ++brute;
        CAPTURE(negatives);
        CAPTURE(per_mille);
        CHECK(min_positives_for_density(negatives, p) == brute);
    }
}

TEST_CASE("length audit counts code points and never edits text") {
    Dataset d = make(0, 3);
    d.examples[0].text = std::string(600, 'a');
    d.examples[1].text = std::string(300, 'a');
    std::string wide;
    for (int i = 0; i < 400; ++i) wide += "\xE2\x88\x80";  // 400 code points, 1200 bytes
    d.examples[2].text = wide;
    const auto before = dataset_to_jsonl(d);
    const auto audit = length_audit(d, 512);
    REQUIRE(audit.size() == 1);
    CHECK(audit[0].id == "d-0");
    CHECK(audit[0].length == 600);
    CHECK(dataset_to_jsonl(d) == before);
    CHECK(length_audit(d, 100).size() == 3);
}

TEST_CASE("dataset JSONL schema") {
    auto d = oversample(make(2, 8), OversampleMode::minority(), 4);
    const auto text = dataset_to_jsonl(d);
    const auto back = dataset_from_jsonl(text, "d");
    CHECK(back.examples == d.examples);

    const auto row = to_json(d.examples.back());
    CHECK(row["origin"].get<std::string>().rfind("dup:", 0) == 0);

    CHECK_THROWS_AS(dataset_from_jsonl("{\"id\":\"a\",\"text\":\"t\",\"label\":2}\n", "x"), DataError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"id\":\"a\",\"text\":\"t\"}\n", "x"), DataError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"id\":\"a\",\"text\":\"t\",\"label\":1}\n{\"id\":\"a\",\"text\":\"u\",\"label\":0}\n", "x"),
                    DataError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"id\":\"a\",\"text\":\"t\",\"label\":1,\"origin\":\"copied\"}\n", "x"),
                    DataError);
    // copies must point at an original with the same text and label
    CHECK_THROWS_AS(dataset_from_jsonl("{\"id\":\"b\",\"text\":\"t\",\"label\":1,\"origin\":\"dup:a\"}\n", "x"), DataError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"id\":\"a\",\"text\":\"t\",\"label\":1}\n"
                                       "{\"id\":\"b\",\"text\":\"other\",\"label\":1,\"origin\":\"dup:a\"}\n",
                                       "x"),
                    DataError);

    testsupport::TempDir dir;
    testsupport::write_file(dir / "ann.jsonl", "{\"id\":\"x\",\"label\":1}\n{\"id\":\"y\",\"label\":0}\n");
    CHECK(read_annotations(dir / "ann.jsonl") == std::map<std::string, int>{{"x", 1}, {"y", 0}});
    testsupport::write_file(dir / "dup.jsonl", "{\"id\":\"x\",\"label\":1}\n{\"id\":\"x\",\"label\":0}\n");
    CHECK_THROWS_AS(read_annotations(dir / "dup.jsonl"), DataError);
}
