#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "gamsum/corpus.hpp"
#include "gamsum/error.hpp"

using namespace gamsum;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/gamsum_test_") + name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

} // namespace

TEST_CASE("load_corpus: well-formed records come back in order") {
    std::string path = write_temp("corpus_ok.jsonl",
        R"({"id":"a","body":"One. Two.","reference":["One."]})" "\n"
        R"({"id":"b","body":"Three.","reference":["Three."]})" "\n"
        R"({"id":"c","body":"Four.","reference":["Four."],"labels":[1]})" "\n");
    std::vector<RawDocument> docs = load_corpus(path);
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].id == "a");
    CHECK(docs[1].id == "b");
    CHECK(docs[2].id == "c");
    CHECK(!docs[0].labels.has_value());
    REQUIRE(docs[2].labels.has_value());
    CHECK(docs[2].labels->at(0) == 1);
}

TEST_CASE("load_corpus: missing field names the line") {
    std::string path = write_temp("corpus_missing.jsonl",
        R"({"id":"a","body":"One.","reference":["One."]})" "\n"
        R"({"id":"b","body":"Two."})" "\n");
    try {
        load_corpus(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("reference") != std::string::npos);
    }
}

TEST_CASE("load_corpus: duplicate ids rejected") {
    std::string path = write_temp("corpus_dup.jsonl",
        R"({"id":"a","body":"One.","reference":["One."]})" "\n"
        R"({"id":"a","body":"Two.","reference":["Two."]})" "\n");
    CHECK_THROWS_AS(load_corpus(path), ValidationError);
}

TEST_CASE("load_corpus: bundled mini-corpus has 50 unique documents") {
    std::vector<RawDocument> docs = load_corpus(std::string(GAMSUM_DATA_DIR) +
                                                "/mini_corpus.jsonl");
    CHECK(docs.size() == 50);
    std::set<std::string> ids;
    for (const RawDocument& d : docs) {
        ids.insert(d.id);
        CHECK(!d.body.empty());
        CHECK(!d.reference.empty());
    }
    CHECK(ids.size() == 50);
}

TEST_CASE("split_corpus: floor-and-remainder sizes") {
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("doc" + std::to_string(i));
    CorpusSplit s = split_corpus(ids, 0.8, 0.1, 0.1, 7);
    CHECK(s.train.size() == 8);
    CHECK(s.validation.size() == 1);
    CHECK(s.test.size() == 1);
}

TEST_CASE("split_corpus: deterministic and partitioning") {
    std::vector<std::string> ids;
    for (int i = 0; i < 37; ++i) ids.push_back("d" + std::to_string(i));
    CorpusSplit a = split_corpus(ids, 0.6, 0.2, 0.2, 42);
    CorpusSplit b = split_corpus(ids, 0.6, 0.2, 0.2, 42);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);

    std::set<std::string> all;
    for (const auto& part : {a.train, a.validation, a.test})
        for (const std::string& id : part) CHECK(all.insert(id).second);
    CHECK(all.size() == ids.size());

    CorpusSplit c = split_corpus(ids, 0.6, 0.2, 0.2, 43);
    CHECK(a.train != c.train); // different seed reshuffles
}

TEST_CASE("split_corpus: bad ratios and empty ids rejected") {
    std::vector<std::string> ids{"a", "b"};
    CHECK_THROWS_AS(split_corpus(ids, 0.5, 0.5, 0.5, 1), ValidationError);
    CHECK_THROWS_AS(split_corpus({}, 0.8, 0.1, 0.1, 1), ValidationError);
}

TEST_CASE("split file round-trips") {
    CorpusSplit s;
    s.train = {"a", "b"};
    s.validation = {"c"};
    s.test = {"d"};
    std::string path = "/tmp/gamsum_test_split.json";
    save_split(s, path);
    CorpusSplit r = load_split(path);
    CHECK(r.train == s.train);
    CHECK(r.validation == s.validation);
    CHECK(r.test == s.test);
}
