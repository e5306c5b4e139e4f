#include <doctest.h>

#include "gamsum/error.hpp"
#include "gamsum/eval.hpp"
#include "gamsum/pipeline.hpp"

using namespace gamsum;

namespace {

Document eval_doc(const std::string& id, const std::vector<std::string>& sentences,
                  const std::vector<std::string>& reference) {
    Document d;
    d.id = id;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        Sentence s;
        s.index = i;
        s.raw = sentences[i];
        Token t;
        t.surface = "x";
        t.stem = "x";
        s.tokens.push_back(t);
        d.sentences.push_back(std::move(s));
    }
    d.raw_reference = reference;
    return d;
}

Summary pick(const std::string& id, std::vector<std::size_t> indices) {
    Summary s;
    s.doc_id = id;
    s.indices = std::move(indices);
    return s;
}

} // namespace

TEST_CASE("evaluate_rouge: identity summaries score 1") {
    std::vector<Document> docs{
        eval_doc("a", {"the cat sat on the mat"}, {"the cat sat on the mat"}),
        eval_doc("b", {"dogs bark loudly"}, {"dogs bark loudly"}),
    };
    std::vector<Summary> sums{pick("a", {0}), pick("b", {0})};
    EvalReport r = evaluate_rouge(docs, sums);
    CHECK(r.mean_rouge1_f == doctest::Approx(1.0));
    CHECK(r.mean_rouge2_f == doctest::Approx(1.0));
    CHECK(r.mean_rougeL_f == doctest::Approx(1.0));
}

TEST_CASE("evaluate_rouge: one perfect, one disjoint averages to a half") {
    std::vector<Document> docs{
        eval_doc("a", {"the cat sat"}, {"the cat sat"}),
        eval_doc("b", {"alpha beta gamma"}, {"totally different words"}),
    };
    std::vector<Summary> sums{pick("a", {0}), pick("b", {0})};
    EvalReport r = evaluate_rouge(docs, sums);
    CHECK(r.mean_rouge1_f == doctest::Approx(0.5));
    CHECK(r.mean_rouge2_f == doctest::Approx(0.5));
    CHECK(r.mean_rougeL_f == doctest::Approx(0.5));
}

TEST_CASE("evaluate_rouge: permutation-invariant over documents") {
    std::vector<Document> docs{
        eval_doc("a", {"one two three"}, {"one two four"}),
        eval_doc("b", {"five six"}, {"five seven"}),
        eval_doc("c", {"eight"}, {"nine"}),
    };
    std::vector<Summary> fwd{pick("a", {0}), pick("b", {0}), pick("c", {0})};
    std::vector<Summary> rev{pick("c", {0}), pick("b", {0}), pick("a", {0})};
    CHECK(evaluate_rouge(docs, fwd).mean_rouge1_f ==
          doctest::Approx(evaluate_rouge(docs, rev).mean_rouge1_f).epsilon(1e-12));
}

TEST_CASE("evaluate_rouge: unknown id is a pairing error") {
    std::vector<Document> docs{eval_doc("a", {"text"}, {"text"})};
    CHECK_THROWS_AS(evaluate_rouge(docs, {pick("zzz", {0})}), ValidationError);
}

TEST_CASE("sentence_f1: identity and disjoint") {
    std::vector<Document> docs{
        eval_doc("a", {"s0", "s1", "s2"}, {"r"}),
        eval_doc("b", {"s0", "s1"}, {"r"}),
    };
    std::vector<std::vector<int>> labels{{1, 0, 1}, {0, 1}};
    std::vector<Summary> exact{pick("a", {0, 2}), pick("b", {1})};
    CHECK(sentence_f1(exact, docs, labels) == doctest::Approx(1.0));

    std::vector<Summary> wrong{pick("a", {1}), pick("b", {0})};
    CHECK(sentence_f1(wrong, docs, labels) == doctest::Approx(0.0));
}

TEST_CASE("sentence_f1: micro counts pooled over documents") {
    // doc a: TP=1 FP=1 FN=1; doc b: TP=1 FP=0 FN=0
    // micro: P=2/3, R=2/3, F=2/3
    std::vector<Document> docs{
        eval_doc("a", {"s0", "s1", "s2"}, {"r"}),
        eval_doc("b", {"s0"}, {"r"}),
    };
    std::vector<std::vector<int>> labels{{1, 0, 1}, {1}};
    std::vector<Summary> sums{pick("a", {0, 1}), pick("b", {0})};
    CHECK(sentence_f1(sums, docs, labels) == doctest::Approx(2.0 / 3.0));
    // macro: doc a F1 = 0.5, doc b F1 = 1 -> 0.75
    CHECK(sentence_f1(sums, docs, labels, F1Averaging::Macro) == doctest::Approx(0.75));
}

TEST_CASE("sentence_f1: zero selected and zero positive labels gives 0 with notice") {
    std::vector<Document> docs{eval_doc("a", {"s0"}, {"r"})};
    std::vector<std::vector<int>> labels{{0}};
    bool notice = false;
    CHECK(sentence_f1({pick("a", {})}, docs, labels, F1Averaging::Micro, &notice) == 0.0);
    CHECK(notice);
}

TEST_CASE("format_report renders percentages") {
    EvalReport r;
    r.mean_rouge1_f = 0.402;
    r.mean_rouge2_f = 0.1812;
    r.mean_rougeL_f = 0.3699;
    std::string text = format_report(r);
    CHECK(text.find("40.20") != std::string::npos);
    CHECK(text.find("18.12") != std::string::npos);
    CHECK(text.find("36.99") != std::string::npos);
}

TEST_CASE("evaluate_rouge: lead run on the bundled corpus matches the frozen fixture") {
    LanguageData lang = load_language_data(GAMSUM_DATA_DIR);
    std::vector<RawDocument> raw =
        load_corpus(std::string(GAMSUM_DATA_DIR) + "/mini_corpus.jsonl");
    std::vector<Document> docs = preprocess_corpus(raw, lang, 1);
    std::vector<Summary> lead;
    for (const Document& d : docs) lead.push_back(lead_baseline(d, SummaryBudget::sentences(3)));
    EvalReport r = evaluate_rouge(docs, lead);
    // frozen once from a verified run; any drift in segmentation,
    // tokenization or ROUGE shows up here
    CHECK(r.mean_rouge1_f == doctest::Approx(0.48348777793184866).epsilon(1e-12));
    CHECK(r.mean_rouge2_f == doctest::Approx(0.33171383632683266).epsilon(1e-12));
    CHECK(r.mean_rougeL_f == doctest::Approx(0.51638865434237291).epsilon(1e-12));
}
