#ifndef GAMSUM_SUMMARIZE_HPP
#define GAMSUM_SUMMARIZE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "gamsum/gam.hpp"
#include "gamsum/preprocess.hpp"

namespace gamsum {

struct SummaryBudget {
    enum class Kind { MaxSentences, MaxWords };
    Kind kind = Kind::MaxSentences;
    std::size_t limit = 3;

    static SummaryBudget sentences(std::size_t k) { return {Kind::MaxSentences, k}; }
    static SummaryBudget words(std::size_t w) { return {Kind::MaxWords, w}; }

    // "sentences:3" or "words:200"
    static SummaryBudget parse(const std::string& text);
    std::string to_string() const;
};

struct Summary {
    std::string doc_id;
    std::vector<std::size_t> indices; // strictly increasing
    std::string text;                 // selected sentences joined in order
    bool empty_notice = false;        // set when nothing was selectable
};

std::vector<double> score_sentences(const AdditiveModel& model, const Document& doc);

// Rank by descending score (ties to the earlier sentence). Sentence budget
// takes top-k; word budget walks the ranked list and stops at the first
// sentence that would overflow. Word counts use non-punctuation terms.
Summary select_sentences(const std::vector<double>& scores, const Document& doc,
                         const SummaryBudget& budget);

Summary lead_baseline(const Document& doc, const SummaryBudget& budget);

Summary oracle_baseline(const Document& doc, const std::vector<int>& labels,
                        const SummaryBudget& budget);

Summary summarize(const AdditiveModel& model, const Document& doc,
                  const SummaryBudget& budget);

} // namespace gamsum

#endif
