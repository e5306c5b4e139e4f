#ifndef GAMSUM_GAMINET_HPP
#define GAMSUM_GAMINET_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "gamsum/ebm.hpp"
#include "gamsum/gam.hpp"

namespace gamsum {

struct GaminetConfig {
    std::array<std::size_t, 3> stage_epochs = {200, 200, 100};
    std::size_t batch_size = 256;
    double step_size = 0.2;
    std::size_t interactions = 10; // K candidate pairs
    double prune_tau = 0.99;       // cumulative contribution-variance ratio kept
    double clarity_weight = 0.1;   // lambda
    std::vector<std::size_t> hidden = {16, 16};
    double clip_norm = 5.0;        // global gradient clipping
    std::size_t max_bins = 256;
    std::size_t pair_max_bins = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

// One fully connected subnetwork per effect: scalar output, tanh hidden
// layers, linear output layer. Parameters are stored flat, layer by layer
// (weights row-major, then biases), which keeps clipping, updates and
// finite-difference checks simple.
struct Subnetwork {
    enum class Kind { Main, Pair };
    Kind kind = Kind::Main;
    std::size_t feature_i = 0;
    std::size_t feature_j = 0;              // pairs only
    std::vector<std::size_t> layers;        // {input, hidden..., 1}
    std::vector<double> params;

    static Subnetwork make(Kind kind, std::size_t fi, std::size_t fj,
                           const std::vector<std::size_t>& hidden, std::uint64_t seed);

    double output(double a, double b = 0.0) const;
    std::size_t param_count() const { return params.size(); }
};

struct GaminetModel {
    double bias = 0.0;
    Binner binner;
    Binner pair_binner;
    std::vector<Subnetwork> mains; // retained only; pruned effects are gone
    std::vector<Subnetwork> pairs;
    AdditiveModel exported;        // grid export used for scoring/persistence

    double predict_native_logit(const FeatureVector& x) const;
};

struct GaminetReport {
    std::vector<TrainLogEntry> stage_log[3];
    std::vector<std::size_t> retained_mains;
    std::vector<std::size_t> pruned_mains;
    std::vector<InteractionCandidate> trained_pairs; // post-heredity top-K
    std::vector<std::pair<std::size_t, std::size_t>> retained_pairs;
    std::vector<std::pair<std::size_t, std::size_t>> pruned_pairs;
};

// Three stages: joint main-subnetwork training with variance pruning at
// tau; interaction screening on stage-1 residuals (shared ranking code
// with the boosted trainer), heredity-filtered pair training with the
// marginal-clarity penalty, pruning again; joint fine-tuning of what
// survived. Networks are then evaluated on the quantile grids and exported
// as an AdditiveModel.
GaminetModel train_gaminet(const std::vector<FeatureVector>& x_train,
                           const std::vector<int>& y_train,
                           const std::vector<FeatureVector>& x_val,
                           const std::vector<int>& y_val,
                           const GaminetConfig& config, GaminetReport* report = nullptr);

// Mean over each parent feature's bins of the squared bin-conditional mean
// of the pair output, averaged over the two parents; zero iff the output
// has zero conditional mean along both axes on the batch.
double clarity_penalty(const Subnetwork& pair, const std::vector<FeatureVector>& batch,
                       const Binner& pair_binner);

// Central finite differences (step 1e-5, long-double forward path) against
// the analytic backprop gradient of the training objective on one
// subnetwork; returns the max relative error over parameters (relative to
// max(|analytic|, |numeric|, 1e-4)).
double gradient_check(const Subnetwork& net, const std::vector<FeatureVector>& batch,
                      const std::vector<int>& y, double clarity_weight,
                      const Binner& pair_binner);

} // namespace gamsum

#endif
