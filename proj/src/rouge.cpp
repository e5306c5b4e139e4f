#include "gamsum/rouge.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "gamsum/stemmer.hpp"

namespace gamsum {

namespace {

RougeScore make_score(double overlap, double cand_total, double ref_total) {
    RougeScore s;
    s.precision = cand_total > 0.0 ? overlap / cand_total : 0.0;
    s.recall = ref_total > 0.0 ? overlap / ref_total : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const std::vector<TokenList>& sentences, int n) {
    NgramCounts counts;
    for (const TokenList& sent : sentences) {
        if (sent.size() < static_cast<std::size_t>(n)) continue;
        for (std::size_t i = 0; i + n <= sent.size(); ++i)
            ++counts[std::vector<std::string>(sent.begin() + i, sent.begin() + i + n)];
    }
    return counts;
}

std::size_t total_tokens(const std::vector<TokenList>& sentences) {
    std::size_t total = 0;
    for (const TokenList& sent : sentences) total += sent.size();
    return total;
}

// Marks reference positions hit by one canonical LCS alignment (standard
// DP, backtrace preferring diagonal moves).
void mark_lcs_hits(const TokenList& ref, const TokenList& cand, std::vector<char>& hits) {
    const std::size_t n = ref.size(), m = cand.size();
    if (n == 0 || m == 0) return;
    std::vector<std::vector<unsigned>> dp(n + 1, std::vector<unsigned>(m + 1, 0));
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j)
            dp[i][j] = ref[i - 1] == cand[j - 1]
                           ? dp[i - 1][j - 1] + 1
                           : std::max(dp[i - 1][j], dp[i][j - 1]);
    std::size_t i = n, j = m;
    while (i > 0 && j > 0) {
        if (ref[i - 1] == cand[j - 1] && dp[i][j] == dp[i - 1][j - 1] + 1) {
            hits[i - 1] = 1;
            --i;
            --j;
        } else if (dp[i - 1][j] >= dp[i][j - 1]) {
            --i;
        } else {
            --j;
        }
    }
}

} // namespace

TokenList rouge_tokenize(const std::string& sentence, bool stem) {
    TokenList tokens;
    std::string current;
    for (unsigned char c : sentence) {
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    if (stem)
        for (std::string& t : tokens) t = stem_english(t);
    return tokens;
}

RougeScore rouge_n(const std::vector<TokenList>& candidate,
                   const std::vector<TokenList>& reference, int n) {
    NgramCounts cand = count_ngrams(candidate, n);
    NgramCounts ref = count_ngrams(reference, n);

    double overlap = 0.0, cand_total = 0.0, ref_total = 0.0;
    for (const auto& [gram, count] : cand) cand_total += static_cast<double>(count);
    for (const auto& [gram, count] : ref) {
        ref_total += static_cast<double>(count);
        auto it = cand.find(gram);
        if (it != cand.end())
            overlap += static_cast<double>(std::min(count, it->second));
    }
    return make_score(overlap, cand_total, ref_total);
}

RougeScore rouge_l(const std::vector<TokenList>& candidate,
                   const std::vector<TokenList>& reference) {
    double hits_total = 0.0;
    for (const TokenList& ref_sent : reference) {
        std::vector<char> hits(ref_sent.size(), 0);
        for (const TokenList& cand_sent : candidate)
            mark_lcs_hits(ref_sent, cand_sent, hits);
        for (char h : hits) hits_total += h;
    }
    return make_score(hits_total, static_cast<double>(total_tokens(candidate)),
                      static_cast<double>(total_tokens(reference)));
}

std::size_t lcs_length(const TokenList& a, const TokenList& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

} // namespace gamsum
