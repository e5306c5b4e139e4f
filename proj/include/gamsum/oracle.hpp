#ifndef GAMSUM_ORACLE_HPP
#define GAMSUM_ORACLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gamsum/features.hpp"
#include "gamsum/preprocess.hpp"
#include "gamsum/summarize.hpp"

namespace gamsum {

struct LabeledSentence {
    std::string doc_id;
    std::size_t sentence_index = 0;
    FeatureVector features{};
    int label = 0;
};

struct TrainingSet {
    std::vector<LabeledSentence> rows;

    std::size_t positives() const;
    std::size_t negatives() const;
};

// Greedy extractive oracle: repeatedly add the sentence with the largest
// positive gain in mean(ROUGE-1 F, ROUGE-2 F) of the selected set against
// the reference; stop when no gain or the budget is exhausted.
std::vector<int> greedy_oracle_labels(const Document& doc, const SummaryBudget& budget);

// Balances classes by keeping the minority and sampling the majority
// without replacement; deterministic per seed.
TrainingSet undersample(const TrainingSet& set, std::uint64_t seed);

} // namespace gamsum

#endif
