#ifndef GAMSUM_GAM_HPP
#define GAMSUM_GAM_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gamsum/features.hpp"

namespace gamsum {

// Quantile discretizer. bin(x) counts cut points strictly below x, so bin
// b covers (cut[b-1], cut[b]] and out-of-range values clamp to the edge
// bins by construction.
class Binner {
public:
    Binner() = default;

    static Binner fit(const std::vector<FeatureVector>& rows, std::size_t max_bins);

    std::size_t feature_count() const { return cuts_.size(); }
    std::size_t bin_count(std::size_t feature) const { return cuts_[feature].size() + 1; }
    std::size_t bin_index(std::size_t feature, double value) const;

    // Edges of a bin: first bin starts at the observed min, last ends at
    // the observed max.
    std::pair<double, double> bin_edges(std::size_t feature, std::size_t bin) const;
    double bin_center(std::size_t feature, std::size_t bin) const;

    const std::vector<double>& cut_points(std::size_t feature) const { return cuts_[feature]; }
    double observed_min(std::size_t feature) const { return min_[feature]; }
    double observed_max(std::size_t feature) const { return max_[feature]; }

    // Used only by serialization.
    void set_raw(std::vector<std::vector<double>> cuts, std::vector<double> min,
                 std::vector<double> max);

private:
    std::vector<std::vector<double>> cuts_;
    std::vector<double> min_;
    std::vector<double> max_;
};

struct MainShape {
    std::size_t feature = 0;
    std::vector<double> contribution; // per bin, log-odds units
};

struct PairShape {
    std::size_t feature_i = 0; // i < j
    std::size_t feature_j = 0;
    std::size_t bins_i = 0;
    std::size_t bins_j = 0;
    std::vector<double> contribution; // row-major [bins_i][bins_j]

    double at(std::size_t bi, std::size_t bj) const { return contribution[bi * bins_j + bj]; }
    double& at(std::size_t bi, std::size_t bj) { return contribution[bi * bins_j + bj]; }
};

// Binned additive model with a logistic link: intercept + main-effect
// shapes (at most one per feature, ascending feature id) + pairwise
// interaction surfaces (lexicographic, i < j). Prediction sums terms in
// exactly that order, which makes decompose() bit-exact by construction.
// Pair surfaces live on their own (coarser) quantile grid.
struct AdditiveModel {
    double intercept = 0.0;
    Binner binner;
    Binner pair_binner; // empty when the model has no pair terms
    std::vector<MainShape> mains;
    std::vector<PairShape> pairs;

    void validate() const; // ordering/shape invariants
};

struct TermContribution {
    enum class Kind { Intercept, Main, Pair };
    Kind kind = Kind::Intercept;
    std::size_t feature_i = 0;
    std::size_t feature_j = 0;
    double value = 0.0;

    std::string name(const std::vector<std::string>& feature_names) const;
};

std::vector<TermContribution> decompose(const AdditiveModel& model, const FeatureVector& x);
double predict_logit(const AdditiveModel& model, const FeatureVector& x);
double predict_proba(const AdditiveModel& model, const FeatureVector& x);

double logistic(double logit);

enum class ImportanceStatistic { StdDev, MeanAbsDev };

struct TermImportance {
    TermContribution::Kind kind;
    std::size_t feature_i = 0;
    std::size_t feature_j = 0;
    double ratio = 0.0; // ratios over all terms sum to 1

    std::string name(const std::vector<std::string>& feature_names) const;
};

// Per-term variation of contributions over the dataset, normalized to sum
// to one and sorted descending. A model whose terms never vary raises
// TrainingError.
std::vector<TermImportance> importance_ratios(
    const AdditiveModel& model, const std::vector<FeatureVector>& dataset,
    ImportanceStatistic stat = ImportanceStatistic::StdDev);

struct ShapeTable {
    TermContribution::Kind kind;
    std::size_t feature_i = 0;
    std::size_t feature_j = 0;
    // mains: one row per bin {lo, hi, center, contribution}
    std::vector<std::array<double, 4>> rows;
    // pairs: edge lists plus a grid matching decompose at bin centers
    std::vector<std::pair<double, double>> edges_i, edges_j;
    std::vector<std::vector<double>> grid;
};

std::vector<ShapeTable> export_shape_tables(const AdditiveModel& model);

struct LogisticConfig {
    std::size_t max_iterations = 200000;
    double gradient_tolerance = 1e-7;
    std::size_t max_bins = 256;
};

struct LogisticFit {
    AdditiveModel model;
    std::vector<double> coefficients; // raw linear weights, pre-binning
    double bias = 0.0;
    bool converged = false;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
};

// Plain gradient descent on mean logistic loss, stopped on the gradient
// max-norm. The linear fit is then laid onto quantile bins (contribution =
// weight x in-bin mean value) so it exports and persists like any other
// additive model.
LogisticFit train_logistic(const std::vector<FeatureVector>& x, const std::vector<int>& y,
                           const LogisticConfig& config = {});

} // namespace gamsum

#endif
