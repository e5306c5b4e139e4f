#include "gamsum/summarize.hpp"

#include <algorithm>
#include <numeric>

#include "gamsum/error.hpp"

namespace gamsum {

SummaryBudget SummaryBudget::parse(const std::string& text) {
    std::size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw ValidationError("budget must look like 'sentences:3' or 'words:200', got '" +
                              text + "'");
    std::string kind = text.substr(0, colon);
    std::string value = text.substr(colon + 1);
    std::size_t limit = 0;
    try {
        limit = std::stoul(value);
    } catch (const std::exception&) {
        throw ValidationError("bad budget limit '" + value + "'");
    }
    if (limit < 1) throw ValidationError("budget limit must be >= 1");
    if (kind == "sentences") return sentences(limit);
    if (kind == "words") return words(limit);
    throw ValidationError("unknown budget kind '" + kind + "'");
}

std::string SummaryBudget::to_string() const {
    return (kind == Kind::MaxSentences ? "sentences:" : "words:") + std::to_string(limit);
}

std::vector<double> score_sentences(const AdditiveModel& model, const Document& doc) {
    std::vector<FeatureVector> rows = extract_features(doc);
    std::vector<double> scores(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) scores[i] = predict_proba(model, rows[i]);
    return scores;
}

namespace {

Summary finish_summary(const Document& doc, std::vector<std::size_t> indices) {
    Summary s;
    s.doc_id = doc.id;
    std::sort(indices.begin(), indices.end());
    s.indices = std::move(indices);
    s.empty_notice = s.indices.empty();
    for (std::size_t k = 0; k < s.indices.size(); ++k) {
        if (k > 0) s.text += " ";
        s.text += doc.sentences[s.indices[k]].raw;
    }
    return s;
}

// Walk sentences in `order`; keep them while the budget holds. Word budget
// stops at the first sentence that would overflow.
std::vector<std::size_t> take_until_budget(const Document& doc,
                                           const std::vector<std::size_t>& order,
                                           const SummaryBudget& budget) {
    std::vector<std::size_t> picked;
    std::size_t words_used = 0;
    for (std::size_t idx : order) {
        if (budget.kind == SummaryBudget::Kind::MaxSentences) {
            if (picked.size() >= budget.limit) break;
            picked.push_back(idx);
        } else {
            std::size_t w = doc.sentences[idx].term_count();
            if (words_used + w > budget.limit) break;
            picked.push_back(idx);
            words_used += w;
        }
    }
    return picked;
}

} // namespace

Summary select_sentences(const std::vector<double>& scores, const Document& doc,
                         const SummaryBudget& budget) {
    if (doc.sentences.empty())
        throw ValidationError("select_sentences: empty document '" + doc.id + "'");
    if (scores.size() != doc.sentences.size())
        throw ValidationError("select_sentences: score count mismatch for '" + doc.id + "'");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b; // ties go to the earlier sentence
    });
    return finish_summary(doc, take_until_budget(doc, order, budget));
}

Summary lead_baseline(const Document& doc, const SummaryBudget& budget) {
    if (doc.sentences.empty())
        throw ValidationError("lead_baseline: empty document '" + doc.id + "'");
    std::vector<std::size_t> order(doc.sentences.size());
    std::iota(order.begin(), order.end(), 0);
    return finish_summary(doc, take_until_budget(doc, order, budget));
}

Summary oracle_baseline(const Document& doc, const std::vector<int>& labels,
                        const SummaryBudget& budget) {
    if (labels.size() != doc.sentences.size())
        throw ValidationError("oracle_baseline: label count mismatch for '" + doc.id + "'");
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 1) order.push_back(i);
    return finish_summary(doc, take_until_budget(doc, order, budget));
}

Summary summarize(const AdditiveModel& model, const Document& doc,
                  const SummaryBudget& budget) {
    return select_sentences(score_sentences(model, doc), doc, budget);
}

} // namespace gamsum
