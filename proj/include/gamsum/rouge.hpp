#ifndef GAMSUM_ROUGE_HPP
#define GAMSUM_ROUGE_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace gamsum {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

using TokenList = std::vector<std::string>;

// ROUGE's own tokenization: lowercase, split on non-alphanumerics. An
// optional stemming pass exists for sensitivity checks and is off by
// default, matching the reference tool.
TokenList rouge_tokenize(const std::string& sentence, bool stem = false);

// N-gram overlap (clipped multiset intersection) with n in {1,2}; n-grams
// never cross sentence boundaries. Empty denominators give 0.
RougeScore rouge_n(const std::vector<TokenList>& candidate,
                   const std::vector<TokenList>& reference, int n);

// Summary-level union-LCS: per reference sentence, union of LCS token hits
// against every candidate sentence; recall over reference length,
// precision over candidate length.
RougeScore rouge_l(const std::vector<TokenList>& candidate,
                   const std::vector<TokenList>& reference);

std::size_t lcs_length(const TokenList& a, const TokenList& b);

} // namespace gamsum

#endif
