#ifndef GAMSUM_EBM_HPP
#define GAMSUM_EBM_HPP

#include <cstdint>
#include <vector>

#include "gamsum/gam.hpp"

namespace gamsum {

struct EbmConfig {
    std::size_t rounds = 500;       // outer boosting rounds per stage
    double learning_rate = 0.05;
    std::size_t max_leaves = 3;     // per feature-tree
    std::size_t bag_count = 8;
    double bag_fraction = 0.85;     // subsample share per bag, no replacement
    std::size_t interactions = 10;  // K: pair terms kept after ranking
    std::size_t max_bins = 256;
    std::size_t pair_max_bins = 32; // pair surfaces use a coarser grid
    std::size_t patience = 50;      // early stop on validation logloss
    std::uint64_t seed = 0;

    void validate() const;
};

struct InteractionCandidate {
    std::size_t feature_i = 0;
    std::size_t feature_j = 0;
    double strength = 0.0;
};

struct TrainLogEntry {
    std::size_t round = 0;
    double train_logloss = 0.0;
    double val_logloss = 0.0; // NaN when no validation set
};

struct EbmReport {
    std::vector<TrainLogEntry> mains_log;
    std::vector<TrainLogEntry> pairs_log;
    std::vector<InteractionCandidate> ranking; // descending strength
    std::size_t mains_best_round = 0;
    std::size_t pairs_best_round = 0;
    double mains_val_logloss = 0.0;
    double final_val_logloss = 0.0;
    bool pairs_dropped_no_gain = false;
};

// Stage 1: cyclic gradient boosting of main effects with bagging. Each
// round fits one small piecewise-constant tree per feature on the current
// logistic-loss residuals of every bag. Early boosting rounds place cuts
// randomly (smoothing); each bag early-stops on its out-of-bag rows (the
// provided validation set when the bag covers everything) and contributes
// its best-round shapes to the final average.
AdditiveModel train_main_effects(const std::vector<FeatureVector>& x_train,
                                 const std::vector<int>& y_train,
                                 const std::vector<FeatureVector>& x_val,
                                 const std::vector<int>& y_val,
                                 const EbmConfig& config, EbmReport* report = nullptr);

// FAST-style screen: for every feature pair, the squared-error reduction
// of the best four-quadrant lookup over the best additive fit with the
// same cuts, both on the mains-model residuals. Descending strength,
// lexicographic ties, top-K.
std::vector<InteractionCandidate> rank_interactions(const AdditiveModel& mains_model,
                                                    const std::vector<FeatureVector>& x,
                                                    const std::vector<int>& y,
                                                    const EbmConfig& config);

// Shared low-level screen (also used by the neural trainer): ranks ALL
// pairs by strength on caller-supplied residuals.
std::vector<InteractionCandidate> rank_interactions_on_residuals(
    const Binner& pair_binner, const std::vector<FeatureVector>& x,
    const std::vector<double>& residuals);

// Full pipeline: mains, interaction ranking, pair boosting on residuals
// with mains frozen. Pairs are dropped when they fail to improve
// validation logloss.
AdditiveModel train_ebm(const std::vector<FeatureVector>& x_train,
                        const std::vector<int>& y_train,
                        const std::vector<FeatureVector>& x_val,
                        const std::vector<int>& y_val,
                        const EbmConfig& config, EbmReport* report = nullptr);

double mean_logloss(const AdditiveModel& model, const std::vector<FeatureVector>& x,
                    const std::vector<int>& y);

} // namespace gamsum

#endif
