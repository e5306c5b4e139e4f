#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gamsum/features.hpp"
#include "gamsum/preprocess.hpp"
#include "gamsum/rng.hpp"

using namespace gamsum;

namespace {

Token word(const std::string& stem, bool proper = false, bool numeric = false) {
    Token t;
    t.surface = stem;
    t.stem = stem;
    t.is_proper_noun = proper;
    t.is_numeric = numeric;
    return t;
}

Token stopword(const std::string& stem) {
    Token t = word(stem);
    t.is_stopword = true;
    return t;
}

Token punct(const std::string& s) {
    Token t;
    t.surface = s;
    t.stem = s;
    t.is_punctuation = true;
    return t;
}

Document make_doc(std::vector<std::vector<Token>> sentences) {
    Document d;
    d.id = "synthetic";
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        Sentence s;
        s.index = i;
        s.tokens = std::move(sentences[i]);
        d.sentences.push_back(std::move(s));
    }
    return d;
}

// Independent evaluation of the feature formulas, written against the
// definitions rather than sharing any code with the implementation. Used
// as the oracle for extract_features.
std::vector<FeatureVector> reference_features(const Document& doc) {
    const std::size_t n = doc.sentences.size();
    std::vector<std::vector<std::string>> stems(n);
    std::vector<std::size_t> terms(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (const Token& t : doc.sentences[i].tokens) {
            if (t.is_punctuation) continue;
            ++terms[i];
            if (!t.is_stopword) stems[i].push_back(t.stem);
        }
    }

    // TF-ISF over adjacent stem bigrams; F(b) document-wide occurrences,
    // n_b = sentences containing b, natural log.
    std::map<std::string, double> doc_freq;
    std::map<std::string, double> sent_freq;
    for (std::size_t i = 0; i < n; ++i) {
        std::map<std::string, bool> seen;
        for (std::size_t j = 0; j + 1 < stems[i].size(); ++j) {
            std::string key = stems[i][j] + "\x01" + stems[i][j + 1];
            doc_freq[key] += 1.0;
            if (!seen[key]) {
                sent_freq[key] += 1.0;
                seen[key] = true;
            }
        }
    }
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j + 1 < stems[i].size(); ++j) {
            std::string key = stems[i][j] + "\x01" + stems[i][j + 1];
            w[i] += doc_freq[key] * std::log(static_cast<double>(n) / sent_freq[key]);
        }
    double w_max = 0.0;
    for (double v : w) w_max = std::max(w_max, v);

    std::size_t max_terms = 0;
    for (std::size_t t : terms) max_terms = std::max(max_terms, t);

    auto cosine = [&](std::size_t a, std::size_t b) {
        std::map<std::string, double> ca, cb;
        for (const std::string& s : stems[a]) ca[s] += 1.0;
        for (const std::string& s : stems[b]) cb[s] += 1.0;
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (const auto& [k, v] : ca) {
            na += v * v;
            if (cb.count(k)) dot += v * cb[k];
        }
        for (const auto& [k, v] : cb) nb += v * v;
        return na > 0.0 && nb > 0.0 ? dot / (std::sqrt(na) * std::sqrt(nb)) : 0.0;
    };
    std::vector<double> sim_sum(n, 0.0);
    double sim_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) sim_sum[i] += cosine(i, j);
        sim_max = std::max(sim_max, sim_sum[i]);
    }

    std::vector<FeatureVector> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t proper = 0, numeric = 0;
        for (const Token& t : doc.sentences[i].tokens) {
            if (t.is_punctuation) continue;
            if (t.is_proper_noun) ++proper;
            if (t.is_numeric) ++numeric;
        }
        rows[i][0] = w_max > 0.0 ? w[i] / w_max : 0.0;
        rows[i][1] = static_cast<double>(i + 1) / static_cast<double>(n);
        rows[i][2] = max_terms > 0 ? static_cast<double>(terms[i]) /
                                         static_cast<double>(max_terms)
                                   : 0.0;
        rows[i][3] = terms[i] > 0 ? static_cast<double>(proper) /
                                        static_cast<double>(terms[i])
                                  : 0.0;
        rows[i][4] = terms[i] > 0 ? static_cast<double>(numeric) /
                                        static_cast<double>(terms[i])
                                  : 0.0;
        rows[i][5] = sim_max > 0.0 ? sim_sum[i] / sim_max : 0.0;
    }
    return rows;
}

Document random_doc(Rng& rng) {
    static const std::vector<std::string> vocab = {
        "alpha", "beta", "gamma", "delta", "epsilon", "zeta",
        "eta",   "theta", "iota", "kappa", "lambda",  "mu",
    };
    std::size_t n = 1 + rng.below(7);
    std::vector<std::vector<Token>> sentences(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t len = rng.below(9); // zero-term sentences allowed
        for (std::size_t k = 0; k < len; ++k) {
            double kind = rng.uniform01();
            if (kind < 0.12) {
                sentences[i].push_back(punct("."));
            } else if (kind < 0.2) {
                sentences[i].push_back(stopword("the"));
            } else {
                Token t = word(vocab[rng.below(vocab.size())]);
                t.is_proper_noun = rng.uniform01() < 0.15;
                t.is_numeric = !t.is_proper_noun && rng.uniform01() < 0.1;
                sentences[i].push_back(t);
            }
        }
    }
    return make_doc(std::move(sentences));
}

} // namespace

TEST_CASE("tf_isf: worked bigram example") {
    Document doc = make_doc({{word("cat"), word("sat"), word("mat")},
                             {word("cat"), word("sat")}});
    std::vector<double> x1 = tf_isf(doc);
    REQUIRE(x1.size() == 2);
    CHECK(x1[0] == doctest::Approx(1.0));
    CHECK(x1[1] == doctest::Approx(0.0));
    // check the raw weight too: only (sat,mat) survives, F=1, ln(2/1)
    DocumentFeatureContext ctx = build_feature_context(doc);
    CHECK(ctx.tf_isf_weights[0] == doctest::Approx(std::log(2.0)));
    CHECK(ctx.tf_isf_weights[1] == doctest::Approx(0.0));
}

TEST_CASE("tf_isf: identical sentences give all zeros") {
    Document doc = make_doc({{word("cat"), word("sat")},
                             {word("cat"), word("sat")},
                             {word("cat"), word("sat")}});
    for (double v : tf_isf(doc)) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("tf_isf: fewer than two content terms means zero weight") {
    Document doc = make_doc({{word("cat")}, {word("dog"), word("ran")}});
    DocumentFeatureContext ctx = build_feature_context(doc);
    CHECK(ctx.tf_isf_weights[0] == 0.0);
}

TEST_CASE("position: one-based fractions") {
    Document doc4 = make_doc({{word("a")}, {word("b")}, {word("c")}, {word("d")}});
    std::vector<double> x2 = position(doc4);
    CHECK(x2[0] == doctest::Approx(0.25));
    CHECK(x2[1] == doctest::Approx(0.5));
    CHECK(x2[2] == doctest::Approx(0.75));
    CHECK(x2[3] == doctest::Approx(1.0));

    Document doc1 = make_doc({{word("a")}});
    CHECK(position(doc1)[0] == doctest::Approx(1.0));
}

TEST_CASE("length: normalized by max term count") {
    Document doc = make_doc({
        {word("a"), word("b"), word("c"), word("d"), word("e")},
        {word("a"), word("b"), word("c"), word("d"), word("e"),
         word("f"), word("g"), word("h"), word("i"), word("j")},
    });
    std::vector<double> x3 = length(doc);
    CHECK(x3[0] == doctest::Approx(0.5));
    CHECK(x3[1] == doctest::Approx(1.0));

    Document empty_sentence = make_doc({{punct(".")}, {word("a")}});
    CHECK(length(empty_sentence)[0] == doctest::Approx(0.0));
}

TEST_CASE("proper noun and numeric ratios") {
    Document doc = make_doc({{word("Paris", true), word("beat"),
                              word("Lyon", true), word("today")}});
    CHECK(proper_noun_ratio(doc)[0] == doctest::Approx(0.5));

    Document num = make_doc({{word("It"), word("rose"), word("5", false, true),
                              word("%")}});
    CHECK(numeric_ratio(num)[0] == doctest::Approx(0.25));

    Document none = make_doc({{word("plain"), word("words")}});
    CHECK(proper_noun_ratio(none)[0] == doctest::Approx(0.0));
    CHECK(numeric_ratio(none)[0] == doctest::Approx(0.0));
}

TEST_CASE("sentence_similarity: identical pair plus disjoint sentence") {
    Document doc = make_doc({{word("cat"), word("sat")},
                             {word("cat"), word("sat")},
                             {word("dog"), word("ran")}});
    std::vector<double> x6 = sentence_similarity(doc);
    CHECK(x6[0] == doctest::Approx(1.0));
    CHECK(x6[1] == doctest::Approx(1.0));
    CHECK(x6[2] == doctest::Approx(0.0));
}

TEST_CASE("sentence_similarity: single sentence is zero") {
    Document doc = make_doc({{word("cat"), word("sat")}});
    CHECK(sentence_similarity(doc)[0] == doctest::Approx(0.0));
}

TEST_CASE("sentence_similarity: matches brute-force cosines") {
    Document doc = make_doc({{word("a"), word("b"), word("b")},
                             {word("b"), word("c")},
                             {word("a"), word("c"), word("c")}});
    DocumentFeatureContext ctx = build_feature_context(doc);
    // hand: c01 = (1*0 + 2*1)/(sqrt(5)*sqrt(2))
    CHECK(ctx.cosine[0][1] == doctest::Approx(2.0 / (std::sqrt(5.0) * std::sqrt(2.0))));
    CHECK(ctx.cosine[0][2] == doctest::Approx(1.0 / (std::sqrt(5.0) * std::sqrt(5.0))));
    CHECK(ctx.cosine[1][2] == doctest::Approx(2.0 / (std::sqrt(2.0) * std::sqrt(5.0))));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(std::fabs(ctx.cosine[i][j] - ctx.cosine[j][i]) <= 1e-12);
}

TEST_CASE("extract_features: shape, range, agreement with the row functions") {
    Document doc = make_doc({{word("cat"), word("sat"), punct(".")},
                             {word("dog", true), word("ran"), word("5", false, true)},
                             {word("cat"), word("sat")}});
    std::vector<FeatureVector> rows = extract_features(doc);
    REQUIRE(rows.size() == doc.sentences.size());
    for (const FeatureVector& row : rows)
        for (double v : row) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(std::isfinite(v));
        }
}

TEST_CASE("extract_features: randomized documents match the independent oracle") {
    Rng rng(20240801);
    for (int iter = 0; iter < 200; ++iter) {
        Document doc = random_doc(rng);
        std::vector<FeatureVector> got = extract_features(doc);
        std::vector<FeatureVector> want = reference_features(doc);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            for (std::size_t f = 0; f < kFeatureCount; ++f)
                CHECK(got[i][f] == doctest::Approx(want[i][f]).epsilon(1e-12));
    }
}

TEST_CASE("extract_features: range and normalization properties on random docs") {
    Rng rng(77);
    for (int iter = 0; iter < 100; ++iter) {
        Document doc = random_doc(rng);
        std::vector<FeatureVector> rows = extract_features(doc);
        double max1 = 0.0, max3 = 0.0, max6 = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (double v : rows[i]) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            if (i > 0) CHECK(rows[i][1] > rows[i - 1][1]); // position monotone
            max1 = std::max(max1, rows[i][0]);
            max3 = std::max(max3, rows[i][2]);
            max6 = std::max(max6, rows[i][5]);
        }
        DocumentFeatureContext ctx = build_feature_context(doc);
        if (ctx.max_tf_isf_weight > 0.0) CHECK(max1 == doctest::Approx(1.0));
        if (ctx.max_term_count > 0) CHECK(max3 == doctest::Approx(1.0));
        bool any_sim = false;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i][5] > 0.0) any_sim = true;
        if (any_sim) CHECK(max6 == doctest::Approx(1.0));
    }
}

TEST_CASE("extract_features: permutation covariance (all but position)") {
    Rng rng(99);
    for (int iter = 0; iter < 50; ++iter) {
        Document doc = random_doc(rng);
        const std::size_t n = doc.sentences.size();
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);

        Document shuffled;
        shuffled.id = doc.id;
        for (std::size_t i = 0; i < n; ++i) {
            Sentence s = doc.sentences[perm[i]];
            s.index = i;
            shuffled.sentences.push_back(std::move(s));
        }
        std::vector<FeatureVector> base = extract_features(doc);
        std::vector<FeatureVector> moved = extract_features(shuffled);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t f : {0, 2, 3, 4, 5})
                CHECK(moved[i][f] == doctest::Approx(base[perm[i]][f]).epsilon(1e-12));
    }
}

TEST_CASE("extract_features: golden matrix for a fixed mini-corpus document") {
    LanguageData lang = load_language_data(GAMSUM_DATA_DIR);
    std::vector<RawDocument> raw =
        load_corpus(std::string(GAMSUM_DATA_DIR) + "/mini_corpus.jsonl");
    REQUIRE(raw[0].id == "mini-001");
    Document doc = preprocess_document(raw[0], lang);
    std::vector<FeatureVector> got = extract_features(doc);

    // Frozen once from the independent evaluator above; both must agree.
    std::vector<FeatureVector> frozen = {
        {1, 0.125, 1, 0.125, 0.0625, 0.85888889800243662},
        {1, 0.25, 0.9375, 0.13333333333333333, 0.066666666666666666, 0},
        {0.70000000000000018, 0.375, 0.75, 0, 0, 0.93833455157119716},
        {0.60000000000000009, 0.5, 0.625, 0, 0, 0.53418706171156738},
        {0.60000000000000009, 0.625, 0.5625, 0, 0, 0},
        {0.60000000000000009, 0.75, 0.625, 0, 0, 0.53418706171156738},
        {0.50000000000000011, 0.875, 0.5, 0, 0, 1},
        {0.50000000000000011, 1, 0.625, 0.29999999999999999, 0, 0},
    };
    std::vector<FeatureVector> oracle = reference_features(doc);
    REQUIRE(got.size() == frozen.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            CHECK(got[i][f] == doctest::Approx(frozen[i][f]).epsilon(1e-12));
            CHECK(oracle[i][f] == doctest::Approx(frozen[i][f]).epsilon(1e-12));
        }
}
