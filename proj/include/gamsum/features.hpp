#ifndef GAMSUM_FEATURES_HPP
#define GAMSUM_FEATURES_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "gamsum/preprocess.hpp"

namespace gamsum {

inline constexpr std::size_t kFeatureCount = 6;

extern const std::array<std::string, kFeatureCount> kFeatureNames;

// x1 tf_isf, x2 position, x3 length, x4 proper-noun ratio, x5 numeric
// ratio, x6 sentence similarity; every component in [0, 1].
using FeatureVector = std::array<double, kFeatureCount>;

// Per-document quantities shared by the feature computations, built once
// and read-only afterward.
struct DocumentFeatureContext {
    std::size_t sentence_count = 0;
    double max_tf_isf_weight = 0.0;                 // max w(s) before normalization
    std::size_t max_term_count = 0;
    std::vector<double> tf_isf_weights;             // raw w(s)
    std::vector<std::vector<double>> cosine;        // pairwise, unit diagonal
};

DocumentFeatureContext build_feature_context(const Document& doc);

std::vector<double> tf_isf(const Document& doc);
std::vector<double> position(const Document& doc);
std::vector<double> length(const Document& doc);
std::vector<double> proper_noun_ratio(const Document& doc);
std::vector<double> numeric_ratio(const Document& doc);
std::vector<double> sentence_similarity(const Document& doc);

// Row i holds (x1..x6) for sentence i.
std::vector<FeatureVector> extract_features(const Document& doc);

} // namespace gamsum

#endif
