#include "gamsum/oracle.hpp"

#include <algorithm>

#include "gamsum/error.hpp"
#include "gamsum/rng.hpp"
#include "gamsum/rouge.hpp"

namespace gamsum {

std::size_t TrainingSet::positives() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const LabeledSentence& r) { return r.label == 1; }));
}

std::size_t TrainingSet::negatives() const {
    return rows.size() - positives();
}

std::vector<int> greedy_oracle_labels(const Document& doc, const SummaryBudget& budget) {
    if (doc.sentences.empty())
        throw ValidationError("oracle labeling: document '" + doc.id + "' has no sentences");
    bool reference_empty = true;
    for (const std::string& r : doc.raw_reference)
        if (!rouge_tokenize(r).empty()) reference_empty = false;
    if (reference_empty)
        throw ValidationError("oracle labeling: document '" + doc.id + "' has an empty reference");

    std::vector<TokenList> reference;
    for (const std::string& r : doc.raw_reference) reference.push_back(rouge_tokenize(r));

    const std::size_t n = doc.sentences.size();
    std::vector<TokenList> sentence_tokens(n);
    std::vector<std::size_t> words(n);
    for (std::size_t i = 0; i < n; ++i) {
        sentence_tokens[i] = rouge_tokenize(doc.sentences[i].raw);
        words[i] = doc.sentences[i].term_count();
    }

    auto objective = [&](const std::vector<TokenList>& selected) {
        return 0.5 * (rouge_n(selected, reference, 1).f1 + rouge_n(selected, reference, 2).f1);
    };

    std::vector<int> labels(n, 0);
    std::vector<std::size_t> chosen;
    std::vector<TokenList> selected_tokens;
    std::size_t words_used = 0;
    double current = 0.0;

    while (true) {
        if (budget.kind == SummaryBudget::Kind::MaxSentences && chosen.size() >= budget.limit)
            break;
        double best_gain = 0.0;
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i]) continue;
            if (budget.kind == SummaryBudget::Kind::MaxWords &&
                words_used + words[i] > budget.limit)
                continue;
            selected_tokens.push_back(sentence_tokens[i]);
            double gain = objective(selected_tokens) - current;
            selected_tokens.pop_back();
            if (gain > best_gain + 1e-12) { // ties keep the earlier sentence
                best_gain = gain;
                best = i;
            }
        }
        if (best == n) break; // no positive gain or nothing fits
        labels[best] = 1;
        chosen.push_back(best);
        selected_tokens.push_back(sentence_tokens[best]);
        words_used += words[best];
        current += best_gain;
    }
    return labels;
}

TrainingSet undersample(const TrainingSet& set, std::uint64_t seed) {
    std::size_t pos = set.positives();
    std::size_t neg = set.rows.size() - pos;
    if (pos == 0 || neg == 0)
        throw ValidationError("undersample: both classes must be present (" +
                              std::to_string(pos) + " positive, " + std::to_string(neg) +
                              " negative)");
    int majority_label = neg > pos ? 0 : 1;
    std::size_t minority_count = std::min(pos, neg);
    if (pos == neg) return set; // already balanced, keep membership

    std::vector<std::size_t> majority_idx;
    for (std::size_t i = 0; i < set.rows.size(); ++i)
        if (set.rows[i].label == majority_label) majority_idx.push_back(i);

    Rng rng(derive_seed(seed, "undersample"));
    rng.shuffle(majority_idx);
    majority_idx.resize(minority_count);
    std::sort(majority_idx.begin(), majority_idx.end());

    TrainingSet out;
    std::size_t next = 0;
    for (std::size_t i = 0; i < set.rows.size(); ++i) {
        if (set.rows[i].label != majority_label) {
            out.rows.push_back(set.rows[i]);
        } else if (next < majority_idx.size() && majority_idx[next] == i) {
            out.rows.push_back(set.rows[i]);
            ++next;
        }
    }
    return out;
}

} // namespace gamsum
