#include "gamsum/features.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

namespace gamsum {

const std::array<std::string, kFeatureCount> kFeatureNames = {
    "tf_isf", "position", "length", "proper_nouns", "numerical", "similarity",
};

namespace {

using Bigram = std::pair<std::string, std::string>;

struct BigramStats {
    std::size_t total = 0;          // F(b): occurrences in the whole document
    std::size_t sentence_count = 0; // n_b: sentences containing b
    std::size_t last_sentence = static_cast<std::size_t>(-1);
};

// Cosine over raw stem counts of content terms; 0 when either vector is empty.
double cosine_similarity(const std::map<std::string, double>& a,
                         const std::map<std::string, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [stem, count] : a) {
        na += count * count;
        auto it = b.find(stem);
        if (it != b.end()) dot += count * it->second;
    }
    for (const auto& [stem, count] : b) nb += count * count;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace

DocumentFeatureContext build_feature_context(const Document& doc) {
    DocumentFeatureContext ctx;
    const std::size_t n = doc.sentences.size();
    ctx.sentence_count = n;

    std::vector<std::vector<std::string>> stems(n);
    for (std::size_t i = 0; i < n; ++i) {
        stems[i] = doc.sentences[i].content_stems();
        ctx.max_term_count = std::max(ctx.max_term_count, doc.sentences[i].term_count());
    }

    // Document-level bigram statistics over adjacent content-term stems.
    std::map<Bigram, BigramStats> bigrams;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j + 1 < stems[i].size(); ++j) {
            BigramStats& st = bigrams[{stems[i][j], stems[i][j + 1]}];
            ++st.total;
            if (st.last_sentence != i) {
                st.last_sentence = i;
                ++st.sentence_count;
            }
        }
    }

    ctx.tf_isf_weights.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.0;
        for (std::size_t j = 0; j + 1 < stems[i].size(); ++j) {
            const BigramStats& st = bigrams.at({stems[i][j], stems[i][j + 1]});
            w += static_cast<double>(st.total) *
                 std::log(static_cast<double>(n) / static_cast<double>(st.sentence_count));
        }
        ctx.tf_isf_weights[i] = w;
        ctx.max_tf_isf_weight = std::max(ctx.max_tf_isf_weight, w);
    }

    ctx.cosine.assign(n, std::vector<double>(n, 0.0));
    std::vector<std::map<std::string, double>> counts(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const std::string& stem : stems[i]) counts[i][stem] += 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        ctx.cosine[i][i] = stems[i].empty() ? 0.0 : 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double c = cosine_similarity(counts[i], counts[j]);
            ctx.cosine[i][j] = c;
            ctx.cosine[j][i] = c;
        }
    }
    return ctx;
}

std::vector<double> tf_isf(const Document& doc) {
    DocumentFeatureContext ctx = build_feature_context(doc);
    std::vector<double> out(ctx.sentence_count, 0.0);
    if (ctx.max_tf_isf_weight > 0.0)
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = ctx.tf_isf_weights[i] / ctx.max_tf_isf_weight;
    return out;
}

std::vector<double> position(const Document& doc) {
    const std::size_t n = doc.sentences.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<double>(i + 1) / static_cast<double>(n);
    return out;
}

std::vector<double> length(const Document& doc) {
    const std::size_t n = doc.sentences.size();
    std::size_t max_terms = 0;
    for (const Sentence& s : doc.sentences) max_terms = std::max(max_terms, s.term_count());
    std::vector<double> out(n, 0.0);
    if (max_terms == 0) return out;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<double>(doc.sentences[i].term_count()) /
                 static_cast<double>(max_terms);
    return out;
}

namespace {

std::vector<double> flagged_ratio(const Document& doc, bool Token::* flag) {
    std::vector<double> out(doc.sentences.size(), 0.0);
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
        std::size_t terms = 0, flagged = 0;
        for (const Token& t : doc.sentences[i].tokens) {
            if (t.is_punctuation) continue;
            ++terms;
            if (t.*flag) ++flagged;
        }
        out[i] = terms == 0 ? 0.0
                            : static_cast<double>(flagged) / static_cast<double>(terms);
    }
    return out;
}

} // namespace

std::vector<double> proper_noun_ratio(const Document& doc) {
    return flagged_ratio(doc, &Token::is_proper_noun);
}

std::vector<double> numeric_ratio(const Document& doc) {
    return flagged_ratio(doc, &Token::is_numeric);
}

std::vector<double> sentence_similarity(const Document& doc) {
    DocumentFeatureContext ctx = build_feature_context(doc);
    const std::size_t n = ctx.sentence_count;
    std::vector<double> sums(n, 0.0);
    double max_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sums[i] += ctx.cosine[i][j];
        max_sum = std::max(max_sum, sums[i]);
    }
    std::vector<double> out(n, 0.0);
    if (max_sum > 0.0)
        for (std::size_t i = 0; i < n; ++i) out[i] = sums[i] / max_sum;
    return out;
}

std::vector<FeatureVector> extract_features(const Document& doc) {
    DocumentFeatureContext ctx = build_feature_context(doc);
    const std::size_t n = ctx.sentence_count;

    std::vector<FeatureVector> rows(n);
    std::vector<double> x2 = position(doc);
    std::vector<double> x3 = length(doc);
    std::vector<double> x4 = proper_noun_ratio(doc);
    std::vector<double> x5 = numeric_ratio(doc);

    std::vector<double> sim_sums(n, 0.0);
    double max_sim = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sim_sums[i] += ctx.cosine[i][j];
        max_sim = std::max(max_sim, sim_sums[i]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        rows[i][0] = ctx.max_tf_isf_weight > 0.0
                         ? ctx.tf_isf_weights[i] / ctx.max_tf_isf_weight
                         : 0.0;
        rows[i][1] = x2[i];
        rows[i][2] = x3[i];
        rows[i][3] = x4[i];
        rows[i][4] = x5[i];
        rows[i][5] = max_sim > 0.0 ? sim_sums[i] / max_sim : 0.0;
    }
    return rows;
}

} // namespace gamsum
