#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "gamsum/rng.hpp"
#include "gamsum/rouge.hpp"

using namespace gamsum;

namespace {

// Exponential brute force: longest common subsequence by trying every
// subsequence path. Independent of the DP in the implementation.
std::size_t brute_lcs(const TokenList& a, const TokenList& b, std::size_t ia = 0,
                      std::size_t ib = 0) {
    if (ia == a.size() || ib == b.size()) return 0;
    std::size_t best = std::max(brute_lcs(a, b, ia + 1, ib), brute_lcs(a, b, ia, ib + 1));
    if (a[ia] == b[ib]) best = std::max(best, 1 + brute_lcs(a, b, ia + 1, ib + 1));
    return best;
}

TokenList random_tokens(Rng& rng, std::size_t max_len, std::size_t vocab) {
    TokenList out;
    std::size_t len = rng.below(max_len + 1);
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(std::string(1, static_cast<char>('a' + rng.below(vocab))));
    return out;
}

} // namespace

TEST_CASE("rouge_tokenize: lowercase alphanumeric splitting") {
    TokenList t = rouge_tokenize("The cat, 5% -- sat!");
    CHECK(t == TokenList{"the", "cat", "5", "sat"});
    CHECK(rouge_tokenize("").empty());
    CHECK(rouge_tokenize("?!").empty());
    // optional stemming pass
    CHECK(rouge_tokenize("running dogs", true) == TokenList{"run", "dog"});
}

TEST_CASE("rouge_n: hand-counted fixture") {
    std::vector<TokenList> cand{rouge_tokenize("the cat sat")};
    std::vector<TokenList> ref{rouge_tokenize("the cat ran")};
    RougeScore r1 = rouge_n(cand, ref, 1);
    CHECK(r1.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r1.recall == doctest::Approx(2.0 / 3.0));
    CHECK(r1.f1 == doctest::Approx(2.0 / 3.0));
    RougeScore r2 = rouge_n(cand, ref, 2);
    CHECK(r2.precision == doctest::Approx(0.5));
    CHECK(r2.recall == doctest::Approx(0.5));
    CHECK(r2.f1 == doctest::Approx(0.5));
}

TEST_CASE("rouge_n: identity and disjoint") {
    std::vector<TokenList> text{rouge_tokenize("a man walked home slowly")};
    RougeScore same = rouge_n(text, text, 2);
    CHECK(same.f1 == doctest::Approx(1.0));
    std::vector<TokenList> other{rouge_tokenize("birds fly south, winter comes")};
    CHECK(rouge_n(text, other, 1).f1 == doctest::Approx(0.0));
    // empty candidate: zero denominators give zeros
    RougeScore empty = rouge_n({}, text, 1);
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);
}

TEST_CASE("rouge_n: clipped multiset counting") {
    // "the the the" vs "the the": overlap clipped to 2
    std::vector<TokenList> cand{{"the", "the", "the"}};
    std::vector<TokenList> ref{{"the", "the"}};
    RougeScore r = rouge_n(cand, ref, 1);
    CHECK(r.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.recall == doctest::Approx(1.0));
}

TEST_CASE("rouge_n: f1 invariant under candidate/reference swap") {
    Rng rng(123);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<TokenList> a{random_tokens(rng, 8, 4)};
        std::vector<TokenList> b{random_tokens(rng, 8, 4)};
        RougeScore ab = rouge_n(a, b, 1);
        RougeScore ba = rouge_n(b, a, 1);
        CHECK(ab.f1 == doctest::Approx(ba.f1).epsilon(1e-12));
        CHECK(ab.precision == doctest::Approx(ba.recall).epsilon(1e-12));
    }
}

TEST_CASE("rouge_n: appending a reference n-gram never lowers recall") {
    Rng rng(321);
    for (int iter = 0; iter < 100; ++iter) {
        TokenList cand = random_tokens(rng, 6, 3);
        TokenList ref = random_tokens(rng, 6, 3);
        if (ref.empty()) continue;
        double before = rouge_n({cand}, {ref}, 1).recall;
        TokenList extended = cand;
        extended.push_back(ref[rng.below(ref.size())]);
        double after = rouge_n({extended}, {ref}, 1).recall;
        CHECK(after >= before - 1e-12);
    }
}

TEST_CASE("lcs_length: fixtures and properties") {
    CHECK(lcs_length({"a", "b", "c"}, {"a", "c"}) == 2);
    TokenList x{"p", "q", "r", "s"};
    CHECK(lcs_length(x, x) == x.size());
    CHECK(lcs_length(x, {}) == 0);
}

TEST_CASE("lcs_length: equals brute-force enumeration on random pairs") {
    Rng rng(55);
    for (int iter = 0; iter < 300; ++iter) {
        TokenList a = random_tokens(rng, 10, 3);
        TokenList b = random_tokens(rng, 10, 3);
        std::size_t got = lcs_length(a, b);
        std::size_t want = brute_lcs(a, b);
        CHECK(got == want);
        CHECK(got == lcs_length(b, a)); // symmetric
        CHECK(got <= std::min(a.size(), b.size()));
    }
}

TEST_CASE("rouge_l: hand fixture and identity") {
    std::vector<TokenList> cand{rouge_tokenize("the cat sat")};
    std::vector<TokenList> ref{rouge_tokenize("the cat ran")};
    RougeScore r = rouge_l(cand, ref);
    CHECK(r.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.recall == doctest::Approx(2.0 / 3.0));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(rouge_l(cand, cand).f1 == doctest::Approx(1.0));
}

TEST_CASE("rouge_l: single-sentence scores equal the brute-force LCS ratio") {
    Rng rng(777);
    for (int iter = 0; iter < 200; ++iter) {
        TokenList a = random_tokens(rng, 10, 3);
        TokenList b = random_tokens(rng, 10, 3);
        if (a.empty() || b.empty()) continue;
        double lcs = static_cast<double>(brute_lcs(a, b));
        RougeScore r = rouge_l({a}, {b});
        CHECK(r.precision == doctest::Approx(lcs / static_cast<double>(a.size())));
        CHECK(r.recall == doctest::Approx(lcs / static_cast<double>(b.size())));
    }
}

TEST_CASE("rouge_l: union over candidate sentences") {
    // reference sentence "a b c d"; candidates hit {a,b} and {c,d}:
    // union covers all four tokens.
    std::vector<TokenList> ref{{"a", "b", "c", "d"}};
    std::vector<TokenList> cand{{"a", "b"}, {"c", "d"}};
    RougeScore r = rouge_l(cand, ref);
    CHECK(r.recall == doctest::Approx(1.0));
    CHECK(r.precision == doctest::Approx(1.0));
}
